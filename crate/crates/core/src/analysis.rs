//! Delay-independent and delay-dependent bounds for the global attractor.
//!
//! Everything here is a pure function of a [`MapModel`] (and, for the
//! delay-dependent quantities, of `tau`). Delays are carried on two scales:
//! `tau` in model time units and the dimensionless `theta = mu tau`.

use serde::Serialize;

use crate::error::{Error, Hypothesis, Result};
use crate::maps::{check_unimodal, Feedback, MapModel};
use crate::roots::{self, bisect};

/// Grid used when scanning `g²(x) - x` for fixed points.
pub const CYCLE_SCAN_POINTS: usize = 100_000;
/// Cauchy tolerance for the `g²` iteration.
pub const CYCLE_STEP_TOL: f64 = 1e-12;
pub const CYCLE_MAX_ITER: usize = 1_000_000;
/// Largest `theta` considered by the `(L'_tau)` threshold scan.
pub const THETA_SCAN_MAX: f64 = 50.0;
const THETA_SCAN_MIN: f64 = 1e-8;
const THETA_SCAN_POINTS: usize = 4000;
const MU_SCAN_POINTS: usize = 400;
/// Grid for the Schwarzian sign check on `[alpha, beta]`.
const SCHWARZIAN_GRID: usize = 1000;
const SCHWARZIAN_EXCLUSION: f64 = 1e-4;

/// Closed interval `[lo, hi]`. Serializes as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn everything() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ⊆ other` with `other` widened by `slack` on both sides.
    pub fn is_within(&self, other: &Interval, slack: f64) -> bool {
        other.lo - slack <= self.lo && self.hi <= other.hi + slack
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

/// A delay threshold on both scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub tau: f64,
    pub theta: f64,
}

impl Threshold {
    pub fn unbounded() -> Self {
        Threshold { tau: f64::INFINITY, theta: f64::INFINITY }
    }

    fn from_theta(theta: f64, mu: f64) -> Self {
        Threshold { tau: theta / mu, theta }
    }

    pub fn is_unbounded(&self) -> bool {
        self.theta.is_infinite()
    }
}

/// `g'(0)`.
pub fn slope_at_zero(model: &MapModel) -> f64 {
    model.g_derivatives(0.0)[1]
}

/// The critical point `x0` of `f`.
pub fn critical_point(model: &MapModel) -> Result<f64> {
    match *model.feedback() {
        Feedback::Nicholson { gamma, .. } => Ok(1.0 / gamma),
        Feedback::MackeyGlass { n, .. } => {
            if n <= 1.0 {
                // p x / (1 + x) is increasing.
                Err(Error::NotUnimodal { x_max: f64::INFINITY })
            } else {
                Ok((1.0 / (n - 1.0)).powf(1.0 / n))
            }
        }
        _ => {
            let check = check_unimodal(model, model.default_window(), 10_000)?;
            if check.is_unimodal {
                Ok(check.x0_estimate)
            } else {
                Err(Error::InvalidModel(format!(
                    "f' changes sign more than once on [0, {}]",
                    model.default_window()
                )))
            }
        }
    }
}

/// Positive fixed point `K` of `g`, absent when `g'(0) <= 1`.
pub fn positive_fixed_point(model: &MapModel) -> Result<Option<f64>> {
    if slope_at_zero(model) <= 1.0 {
        return Ok(None);
    }
    let mu = model.mu();
    match *model.feedback() {
        Feedback::Nicholson { p, gamma } => Ok(Some((p / mu).ln() / gamma)),
        Feedback::MackeyGlass { p, n } => Ok(Some((p / mu - 1.0).powf(1.0 / n))),
        _ => {
            let window = model.default_window();
            let grid = 10_000;
            let h = window / grid as f64;
            let d = |x: f64| model.g_raw(x) - x;
            // Skip the repelling neighbourhood of 0, where g(x) > x.
            let mut seen_above = false;
            let mut prev = 0.0;
            for i in 1..=grid {
                let x = h * i as f64;
                let v = d(x);
                if v > 0.0 {
                    seen_above = true;
                } else if seen_above {
                    let k = bisect(d, prev, x, 0.0)?;
                    return Ok(Some(k));
                }
                prev = x;
            }
            Err(Error::NotBracketed { lo: h, hi: window, f_lo: d(h), f_hi: d(window) })
        }
    }
}

/// `(x0, K)` after checking `g'(0) > 1` and `K > x0`.
pub fn standing_hypotheses(model: &MapModel) -> Result<(f64, f64)> {
    if slope_at_zero(model) <= 1.0 {
        return Err(Error::Inapplicable(Hypothesis::UnstableZero));
    }
    let k = positive_fixed_point(model)?.ok_or(Error::Inapplicable(Hypothesis::PositiveEquilibrium))?;
    let x0 = critical_point(model)?;
    if k <= x0 {
        return Err(Error::Inapplicable(Hypothesis::EquilibriumPastCritical));
    }
    Ok((x0, k))
}

/// `[g²(x0), g(x0)]`.
pub fn primary_interval(model: &MapModel) -> Result<Interval> {
    let (x0, _) = standing_hypotheses(model)?;
    let beta = model.g_raw(x0);
    Ok(Interval::new(model.g_raw(beta), beta))
}

/// Condition (L): `g²(x0) >= x0`. The equality case counts as satisfied.
pub fn condition_l(model: &MapModel) -> Result<bool> {
    let (x0, _) = standing_hypotheses(model)?;
    Ok(model.g_raw(model.g_raw(x0)) >= x0)
}

/// How a 2-cycle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleMethod {
    /// `|g'(K)| <= 1`: the interval collapses to `{K}`.
    Equilibrium,
    /// Iteration of `g²` from `alpha`, then bisection.
    Iteration,
    /// Extreme roots of `g²(x) - x` on a grid over `[alpha, beta]`.
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCycle {
    pub alpha_bar: f64,
    pub beta_bar: f64,
    pub method: CycleMethod,
    /// `g²` iterations spent (zero unless `method` is `Iteration`).
    pub iterations: usize,
    /// Set when the iteration and the scan were both run and disagree by
    /// more than `1e-6`; the scan value is reported in that case.
    pub scan_disagreement: Option<f64>,
}

impl TwoCycle {
    pub fn interval(&self) -> Interval {
        Interval::new(self.alpha_bar, self.beta_bar)
    }
}

/// Smallest and largest positive fixed points of `g²` in `[lo, hi]`.
pub fn two_cycle_scan(model: &MapModel, lo: f64, hi: f64, points: usize) -> Result<(f64, f64)> {
    let h2 = |x: f64| model.g_raw(model.g_raw(x)) - x;
    let roots = roots::scan_roots(h2, lo, hi, points, 0.0);
    let positive: Vec<f64> = roots.into_iter().filter(|&r| r > 0.0).collect();
    match (positive.first(), positive.last()) {
        (Some(&a), Some(&b)) => Ok((a, b)),
        _ => Err(Error::NotBracketed { lo, hi, f_lo: h2(lo), f_hi: h2(hi) }),
    }
}

/// True when the Schwarzian of `f` is negative on a grid over `interval`,
/// skipping a small neighbourhood of `x0`.
pub fn schwarzian_negative_on(model: &MapModel, interval: Interval, x0: f64) -> bool {
    let n = SCHWARZIAN_GRID;
    (0..=n).all(|i| {
        let x = interval.lo + interval.width() * i as f64 / n as f64;
        if (x - x0).abs() < SCHWARZIAN_EXCLUSION {
            return true;
        }
        match model.schwarzian(x) {
            Ok(s) => s < 0.0,
            Err(Error::CriticalPoint { .. }) => true,
            Err(_) => false,
        }
    })
}

/// The 2-cycle `(alpha_bar, beta_bar)`: the smallest and largest positive
/// fixed points of `g²`.
///
/// Under (L), `g²` is increasing on `[alpha, beta]` and its iteration from
/// `alpha` climbs to `alpha_bar`. When (L) fails that iteration may be
/// captured by a longer cycle, so the fixed points are located by a scan of
/// `[alpha, beta]` instead.
pub fn two_cycle(model: &MapModel) -> Result<TwoCycle> {
    let (x0, k) = standing_hypotheses(model)?;
    let beta = model.g_raw(x0);
    let alpha = model.g_raw(beta);
    let l_holds = alpha >= x0;
    let slope_k = model.g_derivatives(k)[1];

    if !l_holds {
        let (a, b) = two_cycle_scan(model, alpha, beta, CYCLE_SCAN_POINTS)?;
        return Ok(TwoCycle {
            alpha_bar: a,
            beta_bar: b,
            method: CycleMethod::Scan,
            iterations: 0,
            scan_disagreement: None,
        });
    }
    if slope_k.abs() <= 1.0 {
        return Ok(TwoCycle {
            alpha_bar: k,
            beta_bar: k,
            method: CycleMethod::Equilibrium,
            iterations: 0,
            scan_disagreement: None,
        });
    }

    let h = |x: f64| model.g_raw(model.g_raw(x));
    let mut z = alpha;
    let mut iterations = 0;
    loop {
        let next = h(z);
        iterations += 1;
        if !next.is_finite() {
            return Err(Error::NotConverged { iterations, lo: z, hi: k });
        }
        let step = (next - z).abs();
        z = next;
        if step < CYCLE_STEP_TOL {
            break;
        }
        if iterations >= CYCLE_MAX_ITER {
            return Err(Error::NotConverged { iterations, lo: z, hi: k });
        }
    }
    let alpha_bar = polish_fixed_point(&h, z, alpha, k);
    let mut cycle = TwoCycle {
        alpha_bar,
        beta_bar: model.g_raw(alpha_bar),
        method: CycleMethod::Iteration,
        iterations,
        scan_disagreement: None,
    };

    if !schwarzian_negative_on(model, Interval::new(alpha, beta), x0) {
        let (a, b) = two_cycle_scan(model, alpha, beta, CYCLE_SCAN_POINTS)?;
        let diff = (a - cycle.alpha_bar).abs().max((b - cycle.beta_bar).abs());
        if diff > 1e-6 {
            cycle.alpha_bar = a;
            cycle.beta_bar = b;
            cycle.method = CycleMethod::Scan;
            cycle.scan_disagreement = Some(diff);
        }
    }
    Ok(cycle)
}

/// Refine an approximate attracting fixed point `z` of the increasing map
/// `h` by bisection on `h(x) - x`, within `[lo, hi]`.
fn polish_fixed_point(h: &impl Fn(f64) -> f64, z: f64, lo: f64, hi: f64) -> f64 {
    let d = |x: f64| h(x) - x;
    if d(z) == 0.0 {
        return z;
    }
    let mut delta = 1e-12 * (1.0 + z.abs());
    while delta < hi - lo {
        let a = (z - delta).max(lo);
        let b = (z + delta).min(hi);
        let (da, db) = (d(a), d(b));
        if da > 0.0 && db < 0.0 {
            return bisect(d, a, b, 0.0).unwrap_or(z);
        }
        delta *= 4.0;
    }
    z
}

/// `Π(y)`: the preimage of `y` under `g` restricted to `[K, inf)`.
pub fn pi_inverse(model: &MapModel, y: f64) -> Result<f64> {
    let k = positive_fixed_point(model)?.ok_or(Error::Inapplicable(Hypothesis::PositiveEquilibrium))?;
    if !(y > 0.0 && y < k) {
        return Err(Error::Domain { x: y });
    }
    let mut hi = (2.0 * k).max(k + 1.0);
    while model.g_raw(hi) >= y {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::NotBracketed { lo: k, hi, f_lo: model.g_raw(k) - y, f_hi: model.g_raw(hi) - y });
        }
    }
    bisect(|x| model.g_raw(x) - y, k, hi, 0.0)
}

/// Bisection on `mu` for a sign change of `quantity` over `[mu_lo, mu_hi]`.
pub fn mu_boundary<Q>(model: &MapModel, mu_lo: f64, mu_hi: f64, tol: f64, quantity: Q) -> Result<f64>
where
    Q: Fn(&MapModel) -> f64,
{
    if !(mu_lo > 0.0 && mu_hi > mu_lo) {
        return Err(Error::InvalidArgument(format!("mu range [{mu_lo}, {mu_hi}] is empty or not positive")));
    }
    let q = |mu: f64| model.with_mu(mu).map(|m| quantity(&m)).unwrap_or(f64::NAN);
    // An endpoint can sit exactly on a degenerate parameter (K = x0 for
    // instance), so look for the first interior crossing first.
    let step = (mu_hi - mu_lo) / MU_SCAN_POINTS as f64;
    let grid = (0..=MU_SCAN_POINTS).map(|i| mu_lo + step * i as f64);
    match roots::first_sign_change(q, grid) {
        Some(((a, b), _)) => bisect(q, a, b, tol),
        None => bisect(q, mu_lo, mu_hi, tol),
    }
}

/// `mu` at which (L) switches, from the sign change of `g²(x0) - x0`.
pub fn condition_l_boundary(model: &MapModel, mu_lo: f64, mu_hi: f64) -> Result<f64> {
    let x0 = critical_point(model)?;
    mu_boundary(model, mu_lo, mu_hi, 1e-9, |m| m.g_raw(m.g_raw(x0)) - x0)
}

/// `mu` at which `|g'(K)| = 1`.
pub fn unit_slope_boundary(model: &MapModel, mu_lo: f64, mu_hi: f64) -> Result<f64> {
    mu_boundary(model, mu_lo, mu_hi, 1e-9, |m| match positive_fixed_point(m) {
        Ok(Some(k)) => m.g_derivatives(k)[1].abs() - 1.0,
        _ => f64::NAN,
    })
}

/// Threshold of (L_tau): `theta* = (Π(x0) - x0) / (g(x0) - g²(x0))` and
/// `tau* = theta* / mu`. Unbounded when (L) holds.
pub fn tau_l_threshold(model: &MapModel) -> Result<Threshold> {
    let (x0, _) = standing_hypotheses(model)?;
    let beta = model.g_raw(x0);
    let alpha = model.g_raw(beta);
    if alpha >= x0 {
        return Ok(Threshold::unbounded());
    }
    let pi = pi_inverse(model, x0)?;
    Ok(Threshold::from_theta((pi - x0) / (beta - alpha), model.mu()))
}

/// `g1(x) = (1 - e^{-theta}) g(x) + e^{-theta} K` with `theta = mu tau`.
pub fn g1_eval(model: &MapModel, tau: f64, x: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    let k = positive_fixed_point(model)?.ok_or(Error::Inapplicable(Hypothesis::PositiveEquilibrium))?;
    let gx = model.eval_g(x)?;
    Ok(g1_theta(gx, k, model.mu() * tau))
}

#[inline]
fn g1_theta(gx: f64, k: f64, theta: f64) -> f64 {
    k + (-(-theta).exp_m1()) * (gx - k)
}

/// `g1²(x0) - x0` as a function of `theta`.
fn l_prime_margin(model: &MapModel, x0: f64, k: f64, theta: f64) -> f64 {
    let first = g1_theta(model.g_raw(x0), k, theta);
    g1_theta(model.g_raw(first), k, theta) - x0
}

/// Condition (L'_tau): `g1²(x0) > x0`.
pub fn condition_l_prime(model: &MapModel, tau: f64) -> Result<bool> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    let (x0, k) = standing_hypotheses(model)?;
    Ok(l_prime_margin(model, x0, k, model.mu() * tau) > 0.0)
}

/// The `theta` grid scanned by [`tau_l_prime_threshold`].
pub fn l_prime_theta_grid() -> impl Iterator<Item = f64> {
    roots::geometric_grid(THETA_SCAN_MIN, THETA_SCAN_MAX, THETA_SCAN_POINTS)
}

/// Supremum of the initial `theta` interval on which (L'_tau) holds.
/// Unbounded when (L) holds or when no crossing occurs below
/// [`THETA_SCAN_MAX`].
pub fn tau_l_prime_threshold(model: &MapModel) -> Result<Threshold> {
    let (x0, k) = standing_hypotheses(model)?;
    let alpha = model.g_raw(model.g_raw(x0));
    if alpha >= x0 {
        return Ok(Threshold::unbounded());
    }
    let margin = |theta: f64| l_prime_margin(model, x0, k, theta);
    match roots::first_sign_change(margin, l_prime_theta_grid()) {
        None => Ok(Threshold::unbounded()),
        Some(((a, b), _)) => {
            let theta = bisect(margin, a, b, 0.0)?;
            Ok(Threshold::from_theta(theta, model.mu()))
        }
    }
}

/// `[g1²(x0), g1(x0)]`.
pub fn g1_bounds(model: &MapModel, tau: f64) -> Result<Interval> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    let (x0, k) = standing_hypotheses(model)?;
    let theta = model.mu() * tau;
    let hi = g1_theta(model.g_raw(x0), k, theta);
    let lo = g1_theta(model.g_raw(hi), k, theta);
    Ok(Interval::new(lo, hi))
}

/// First Hopf delay of `x' = -mu x + b x(t - tau)` with `b = f'(K)`.
pub fn linear_stability_delay(model: &MapModel) -> Result<f64> {
    let k = positive_fixed_point(model)?.ok_or(Error::Inapplicable(Hypothesis::PositiveEquilibrium))?;
    let b = model.derivatives(k)[1];
    let mu = model.mu();
    if b.abs() <= mu {
        return Ok(f64::INFINITY);
    }
    if b > mu {
        // A real positive characteristic root exists for every delay.
        return Ok(0.0);
    }
    Ok((mu / b).acos() / (b * b - mu * mu).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DichotomyCase {
    ZeroGloballyAttracting,
    KGloballyAttractingMonotone,
    #[serde(rename = "Case1_PointAttractor")]
    Case1PointAttractor,
    #[serde(rename = "Case2_TwoCycleInterval")]
    Case2TwoCycleInterval,
    #[serde(rename = "Inapplicable_L_fails")]
    InapplicableLFails,
}

impl DichotomyCase {
    pub fn as_str(self) -> &'static str {
        match self {
            DichotomyCase::ZeroGloballyAttracting => "ZeroGloballyAttracting",
            DichotomyCase::KGloballyAttractingMonotone => "KGloballyAttractingMonotone",
            DichotomyCase::Case1PointAttractor => "Case1_PointAttractor",
            DichotomyCase::Case2TwoCycleInterval => "Case2_TwoCycleInterval",
            DichotomyCase::InapplicableLFails => "Inapplicable_L_fails",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomyResult {
    pub case: DichotomyCase,
    pub interval: Interval,
    /// The Schwarzian was not negative everywhere on `[alpha, beta]`, so the
    /// classification rests on the 2-cycle alone.
    pub schwarzian_warning: bool,
}

/// Which attractor description applies to `model` for all delays.
pub fn classify_dichotomy(model: &MapModel) -> Result<DichotomyResult> {
    let ok = |case, interval| Ok(DichotomyResult { case, interval, schwarzian_warning: false });
    if slope_at_zero(model) <= 1.0 {
        return ok(DichotomyCase::ZeroGloballyAttracting, Interval::point(0.0));
    }
    let k = positive_fixed_point(model)?.ok_or(Error::Inapplicable(Hypothesis::PositiveEquilibrium))?;
    let x0 = critical_point(model)?;
    if k <= x0 {
        return ok(DichotomyCase::KGloballyAttractingMonotone, Interval::point(k));
    }
    let beta = model.g_raw(x0);
    let alpha = model.g_raw(beta);
    let primary = Interval::new(alpha, beta);
    if alpha < x0 {
        return ok(DichotomyCase::InapplicableLFails, primary);
    }
    let schwarzian_warning = !schwarzian_negative_on(model, primary, x0);
    let (case, interval) = if model.g_derivatives(k)[1].abs() <= 1.0 {
        (DichotomyCase::Case1PointAttractor, Interval::point(k))
    } else {
        (DichotomyCase::Case2TwoCycleInterval, two_cycle(model)?.interval())
    };
    Ok(DichotomyResult { case, interval, schwarzian_warning })
}

/// All delay-independent quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisProfile {
    pub x0: f64,
    pub k: Option<f64>,
    pub gp0: f64,
    pub gpk: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Present when (L) holds.
    pub alpha_bar: Option<f64>,
    pub beta_bar: Option<f64>,
    pub l_holds: bool,
    pub dichotomy: DichotomyResult,
}

impl AnalysisProfile {
    /// Requires the standing hypotheses `g'(0) > 1` and `K > x0`.
    pub fn compute(model: &MapModel) -> Result<Self> {
        let (x0, k) = standing_hypotheses(model)?;
        let beta = model.g_raw(x0);
        let alpha = model.g_raw(beta);
        let l_holds = alpha >= x0;
        let (alpha_bar, beta_bar) = if l_holds {
            let c = two_cycle(model)?;
            (Some(c.alpha_bar), Some(c.beta_bar))
        } else {
            (None, None)
        };
        Ok(AnalysisProfile {
            x0,
            k: Some(k),
            gp0: slope_at_zero(model),
            gpk: Some(model.g_derivatives(k)[1]),
            alpha,
            beta,
            alpha_bar,
            beta_bar,
            l_holds,
            dichotomy: classify_dichotomy(model)?,
        })
    }

    pub fn primary(&self) -> Interval {
        Interval::new(self.alpha, self.beta)
    }

    /// The sharpest delay-independent interval: `[alpha_bar, beta_bar]`
    /// under (L), otherwise `[alpha, beta]`.
    pub fn sharpest(&self) -> Interval {
        match (self.alpha_bar, self.beta_bar) {
            (Some(a), Some(b)) => Interval::new(a, b),
            _ => self.primary(),
        }
    }
}

/// Delay-dependent conditions at a given `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub tau: f64,
    pub theta: f64,
    pub l_holds: bool,
    pub l_tau_holds: bool,
    pub l_prime_tau_holds: bool,
    pub tau_star: Threshold,
    pub tau_star_prime: Threshold,
    pub g1_bounds: Interval,
}

impl ConditionReport {
    pub fn compute(model: &MapModel, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be finite and nonnegative, got {tau}")));
        }
        let l_holds = condition_l(model)?;
        let tau_star = tau_l_threshold(model)?;
        let tau_star_prime = tau_l_prime_threshold(model)?;
        Ok(ConditionReport {
            tau,
            theta: model.mu() * tau,
            l_holds,
            l_tau_holds: l_holds || tau < tau_star.tau,
            l_prime_tau_holds: condition_l_prime(model, tau)?,
            tau_star,
            tau_star_prime,
            g1_bounds: g1_bounds(model, tau)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nic(mu: f64) -> MapModel {
        MapModel::nicholson_normalized(mu).unwrap()
    }

    fn mg(mu: f64) -> MapModel {
        MapModel::mackey_glass(2.0, 20.0, mu).unwrap()
    }

    fn hump() -> MapModel {
        MapModel::expression("30*(x + x^(5/2))/(2 + 35*x^3)", 1.0).unwrap()
    }

    fn near(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn critical_points() {
        assert_eq!(critical_point(&nic(1.0)).unwrap(), 1.0);
        assert!(near(critical_point(&mg(1.0)).unwrap(), 0.863, 1e-3));
        assert!(near(critical_point(&MapModel::mackey_glass(2.0, 2.0, 1.0).unwrap()).unwrap(), 1.0, 1e-15));
        assert!(critical_point(&MapModel::mackey_glass(2.0, 1.0, 1.0).unwrap()).is_err());
        let x0 = critical_point(&hump()).unwrap();
        assert!(hump().derivatives(x0)[1].abs() < 1e-10);
    }

    #[test]
    fn fixed_points() {
        assert!(near(positive_fixed_point(&nic(0.05)).unwrap().unwrap(), 2.99573, 1e-5));
        assert!(near(positive_fixed_point(&mg(1.79)).unwrap().unwrap(), 0.898, 1e-3));
        assert_eq!(positive_fixed_point(&nic(1.5)).unwrap(), None);
        let r = hump();
        let k = positive_fixed_point(&r).unwrap().unwrap();
        assert!((r.g_raw(k) - k).abs() < 1e-10 * (1.0 + k));
    }

    #[test]
    fn primary_intervals() {
        let j = primary_interval(&nic(0.13)).unwrap();
        assert!(near(j.lo, 1.2848, 1e-3) && near(j.hi, 2.8298, 1e-3));
        let j = primary_interval(&mg(1.0)).unwrap();
        assert!(near(j.lo, 0.00016, 1e-3) && near(j.hi, 1.639, 1e-3));
        let j = primary_interval(&mg(1.79)).unwrap();
        assert!(near(j.lo, 0.872, 1e-3) && near(j.hi, 0.916, 1e-3));
        assert!(matches!(
            primary_interval(&nic(1.5)),
            Err(Error::Inapplicable(Hypothesis::UnstableZero))
        ));
        assert!(matches!(
            primary_interval(&nic(0.5)),
            Err(Error::Inapplicable(Hypothesis::EquilibriumPastCritical))
        ));
    }

    #[test]
    fn two_cycles() {
        let c = two_cycle(&nic(0.05)).unwrap();
        assert_eq!(c.method, CycleMethod::Scan);
        assert!(near(c.alpha_bar, 0.4261, 1e-3) && near(c.beta_bar, 5.5653, 1e-3));
        let c = two_cycle(&nic(0.13)).unwrap();
        assert_eq!(c.method, CycleMethod::Iteration);
        assert!(near(c.alpha_bar, 1.54796, 1e-4) && near(c.beta_bar, 2.53248, 1e-4));
        let c = two_cycle(&hump()).unwrap();
        assert!(near(c.alpha_bar, 0.728449, 1e-4) && near(c.beta_bar, 2.2822, 1e-4));
        let c = two_cycle(&mg(1.85)).unwrap();
        assert_eq!(c.method, CycleMethod::Equilibrium);
        assert_eq!(c.alpha_bar, c.beta_bar);
    }

    #[test]
    fn pi_inverse_examples() {
        assert!(near(pi_inverse(&nic(1.0 / 16.0), 1.0).unwrap(), 4.21007, 1e-4));
        assert!(near(pi_inverse(&mg(1.0), 0.863).unwrap(), 1.0152, 1e-3));
        let m = nic(0.13);
        let c = two_cycle(&m).unwrap();
        assert!(near(pi_inverse(&m, m.g_raw(c.beta_bar)).unwrap(), c.beta_bar, 1e-9));
        assert!(matches!(pi_inverse(&m, 5.0), Err(Error::Domain { .. })));
        assert!(matches!(pi_inverse(&m, 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn condition_l_examples() {
        assert!(condition_l(&nic(0.13)).unwrap());
        assert!(!condition_l(&nic(1.0 / 16.0)).unwrap());
        assert!(condition_l(&mg(1.8)).unwrap());
    }

    #[test]
    fn l_boundaries() {
        assert!(near(condition_l_boundary(&nic(0.1), 0.05, 0.135).unwrap(), 0.10472, 1e-4));
        assert!(near(condition_l_boundary(&mg(1.0), 1.5, 1.9).unwrap(), 1.774, 1e-3));
        assert!(matches!(condition_l_boundary(&nic(0.1), 0.2, 0.3), Err(Error::NotBracketed { .. })));
    }

    #[test]
    fn l_tau_thresholds() {
        let t = tau_l_threshold(&nic(1.0 / 16.0)).unwrap();
        assert!(near(t.theta, 0.570734, 1e-4));
        assert!(near(t.tau, 9.1317, 1e-3));
        let t = tau_l_threshold(&mg(1.0)).unwrap();
        assert!(near(t.tau, 0.092, 2e-3) && t.tau == t.theta);
        assert!(tau_l_threshold(&nic(0.13)).unwrap().is_unbounded());
    }

    #[test]
    fn g1_examples() {
        let m = mg(1.0);
        let k = positive_fixed_point(&m).unwrap().unwrap();
        assert_eq!(g1_eval(&m, 0.0, 0.3).unwrap(), k);
        let x = 0.7;
        let far = g1_eval(&m, 45.0, x).unwrap();
        assert!((far - m.g_raw(x)).abs() <= 1e-12 * m.g_raw(x));
        assert!(near(g1_eval(&m, 0.195, 0.863).unwrap(), 1.113, 1e-3));
        assert!(matches!(g1_eval(&nic(2.0), 1.0, 1.0), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn l_prime_examples() {
        let m = mg(1.0);
        assert!(condition_l_prime(&m, 0.19).unwrap());
        assert!(!condition_l_prime(&m, 0.25).unwrap());
        for tau in [0.1, 1.0, 10.0, 1000.0] {
            assert!(condition_l_prime(&nic(0.13), tau).unwrap());
        }
        assert!(near(tau_l_prime_threshold(&m).unwrap().tau, 0.195, 2e-3));
        assert!(tau_l_prime_threshold(&nic(0.13)).unwrap().is_unbounded());
    }

    #[test]
    fn g1_bounds_examples() {
        let b = g1_bounds(&mg(1.0), 0.195).unwrap();
        assert!(near(b.lo, 0.864, 1e-3) && near(b.hi, 1.113, 1e-3));
        let m = nic(1.0 / 16.0);
        let far = g1_bounds(&m, 1e3).unwrap();
        let j = primary_interval(&m).unwrap();
        assert!(near(far.lo, j.lo, 1e-12) && near(far.hi, j.hi, 1e-12));
        let k = positive_fixed_point(&m).unwrap().unwrap();
        let tiny = g1_bounds(&m, 1e-9).unwrap();
        assert!(tiny.width() < 1e-6 && tiny.contains(k));
    }

    #[test]
    fn dichotomy_examples() {
        assert_eq!(classify_dichotomy(&mg(1.85)).unwrap().case, DichotomyCase::Case1PointAttractor);
        let d = classify_dichotomy(&mg(1.79)).unwrap();
        assert_eq!(d.case, DichotomyCase::Case2TwoCycleInterval);
        assert!(near(d.interval.lo, 0.876, 1e-3) && near(d.interval.hi, 0.914, 1e-3));
        assert!(!d.schwarzian_warning);
        let d = classify_dichotomy(&nic(0.5)).unwrap();
        assert_eq!(d.case, DichotomyCase::KGloballyAttractingMonotone);
        assert!(near(d.interval.lo, 0.5f64.ln().abs(), 1e-12));
        assert_eq!(classify_dichotomy(&nic(1.5)).unwrap().case, DichotomyCase::ZeroGloballyAttracting);
        let d = classify_dichotomy(&nic(1.0 / 16.0)).unwrap();
        assert_eq!(d.case, DichotomyCase::InapplicableLFails);
        let d = classify_dichotomy(&hump()).unwrap();
        assert_eq!(d.case, DichotomyCase::Case2TwoCycleInterval);
        assert!(d.schwarzian_warning);
    }

    #[test]
    fn hopf_delays() {
        assert!(near(linear_stability_delay(&mg(1.0)).unwrap(), 0.188, 1e-3));
        assert!(near(linear_stability_delay(&nic(1.0 / 16.0)).unwrap(), 23.72, 0.1));
        // mu = 0.2: f'(K) = mu (1 - K) with K = ln 5, |b| < mu
        assert!(linear_stability_delay(&nic(0.2)).unwrap().is_infinite());
    }

    #[test]
    fn condition_report_scales() {
        let m = nic(1.0 / 16.0);
        let r = ConditionReport::compute(&m, 5.0).unwrap();
        assert!(!r.l_holds && r.l_tau_holds && r.l_prime_tau_holds);
        assert!(near(r.theta, 5.0 / 16.0, 1e-15));
        assert!(near(r.tau_star.tau * m.mu(), r.tau_star.theta, 1e-12));
        let r = ConditionReport::compute(&m, 10.0).unwrap();
        assert!(!r.l_tau_holds && r.l_prime_tau_holds);
    }
}
