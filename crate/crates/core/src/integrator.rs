//! Method-of-steps integration of `x'(t) = -mu x(t) + f(x(t - tau))`.
//!
//! Fixed-step classical RK4 with `dt = tau / N`. The delayed argument at
//! whole steps is an exact lookup into stored values; at half steps it comes
//! from the cubic Hermite interpolant of the stored segment, using slopes
//! from the right-hand side (or from the history on `[-tau, 0]`).

use std::fmt;
use std::sync::Arc;

use crate::analysis::{g1_eval, positive_fixed_point, Interval};
use crate::error::{Error, Hypothesis, Result};
use crate::maps::MapModel;

pub const MIN_STEPS_PER_DELAY: usize = 50;

/// Initial function on `[-tau, 0]`.
#[derive(Clone)]
pub enum History {
    Constant(f64),
    /// `K (1 + 1e-3)`, resolved against the model at integration time.
    PerturbedEquilibrium,
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::Constant(c) => write!(f, "Constant({c:?})"),
            History::PerturbedEquilibrium => f.write_str("PerturbedEquilibrium"),
            History::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Value and slope of the history at a time in `[-tau, 0]`.
type Sampler<'a> = Box<dyn Fn(f64) -> (f64, f64) + 'a>;

impl History {
    pub fn label(&self) -> String {
        match self {
            History::Constant(c) => format!("const:{c:?}"),
            History::PerturbedEquilibrium => "eq-perturb".to_string(),
            History::Function(_) => "function".to_string(),
        }
    }

    /// Values and slopes of the history at `t`.
    fn sampler(&self, model: &MapModel, tau: f64) -> Result<Sampler<'_>> {
        Ok(match self {
            History::Constant(c) => {
                let c = *c;
                Box::new(move |_| (c, 0.0))
            }
            History::PerturbedEquilibrium => {
                let k = positive_fixed_point(model)?
                    .ok_or(Error::Inapplicable(Hypothesis::PositiveEquilibrium))?;
                let c = k * (1.0 + 1e-3);
                Box::new(move |_| (c, 0.0))
            }
            History::Function(phi) => {
                let h = 1e-6 * tau;
                Box::new(move |t| (phi(t), (phi(t + h) - phi(t - h)) / (2.0 * h)))
            }
        })
    }
}

/// A simulated solution on the uniform grid `t_i = -tau + i dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    x: Vec<f64>,
    tau: f64,
    dt: f64,
    steps_per_delay: usize,
    clamped: usize,
    model_digest: String,
}

impl Trajectory {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_per_delay(&self) -> usize {
        self.steps_per_delay
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps_per_delay {
            0.0
        } else {
            (i as f64 - self.steps_per_delay as f64) * self.dt
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.x.len()).map(|i| self.time(i))
    }

    /// Final time.
    pub fn t_end(&self) -> f64 {
        self.time(self.x.len() - 1)
    }

    /// Number of steps whose result was negative and was clamped to zero.
    pub fn clamped_steps(&self) -> usize {
        self.clamped
    }

    /// Identifier of the model, history, delay and step count.
    pub fn model_digest(&self) -> &str {
        &self.model_digest
    }

    /// Index of the first grid point with `t >= 0`.
    pub fn origin_index(&self) -> usize {
        self.steps_per_delay
    }

    /// `x(T)`.
    pub fn last(&self) -> f64 {
        *self.x.last().expect("trajectory is never empty")
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Default horizon `max(50 tau, 200 / mu)`.
pub fn default_horizon(model: &MapModel, tau: f64) -> f64 {
    (50.0 * tau).max(200.0 / model.mu())
}

/// Integrate from the history on `[-tau, 0]` to `t_end`.
///
/// The horizon is rounded up to a whole number of steps.
pub fn integrate(
    model: &MapModel,
    tau: f64,
    history: &History,
    t_end: f64,
    steps_per_delay: usize,
) -> Result<Trajectory> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    if steps_per_delay < MIN_STEPS_PER_DELAY {
        return Err(Error::InvalidArgument(format!(
            "steps per delay must be at least {MIN_STEPS_PER_DELAY}, got {steps_per_delay}"
        )));
    }
    if !(t_end >= tau && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon T = {t_end} must be at least tau = {tau}")));
    }

    let n = steps_per_delay;
    let dt = tau / n as f64;
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let mu = model.mu();
    let rhs = |x: f64, delayed: f64| -mu * x + model.f_raw(delayed);

    let sample = history.sampler(model, tau)?;
    let mut x = Vec::with_capacity(n + 1 + steps);
    let mut slope = Vec::with_capacity(n + 1 + steps);
    for i in 0..=n {
        let t = if i == n { 0.0 } else { (i as f64 - n as f64) * dt };
        let (v, s) = sample(t);
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("history must be finite and nonnegative, got {v} at t = {t}")));
        }
        x.push(v);
        slope.push(s);
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("history is identically zero".into()));
    }
    // Left derivative of the history at 0; slope[n] becomes the right
    // derivative of the solution.
    let history_slope_at_zero = slope[n];
    slope[n] = rhs(x[n], x[0]);

    let mut clamped = 0;
    for i in n..n + steps {
        let j = i - n;
        let (da, db) = (x[j], x[j + 1]);
        let sa = slope[j];
        let sb = if j + 1 == n { history_slope_at_zero } else { slope[j + 1] };
        let mid = (0.5 * (da + db) + dt * (sa - sb) / 8.0).max(0.0);

        let xi = x[i];
        let k1 = rhs(xi, da);
        let k2 = rhs(xi + 0.5 * dt * k1, mid);
        let k3 = rhs(xi + 0.5 * dt * k2, mid);
        let k4 = rhs(xi + dt * k3, db);
        let mut next = xi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::Divergence { t: (j as f64) * dt });
        }
        if next < 0.0 {
            next = 0.0;
            clamped += 1;
        }
        x.push(next);
        slope.push(rhs(next, x[i + 1 - n]));
    }

    let digest = format!("{}|tau={tau:?}|N={n}|history={}", model.describe(), history.label());
    Ok(Trajectory {
        x,
        tau,
        dt,
        steps_per_delay: n,
        clamped,
        model_digest: format!("{:016x}", fnv1a(&digest)),
    })
}

/// Extremes of a trajectory tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailStats {
    /// Estimate of `liminf x(t)`.
    pub liminf: f64,
    /// Estimate of `limsup x(t)`.
    pub limsup: f64,
    pub window: Interval,
    /// Earliest grid time after which `x > x0` through `T`; absent unless
    /// that holds over the whole tail window.
    pub entry_time: Option<f64>,
}

impl TailStats {
    pub fn interval(&self) -> Interval {
        Interval::new(self.liminf, self.limsup)
    }

    pub fn amplitude(&self) -> f64 {
        self.limsup - self.liminf
    }
}

/// Min and max over `t >= discard_fraction * T`.
pub fn tail_stats(traj: &Trajectory, x0: f64, discard_fraction: f64) -> Result<TailStats> {
    if !(discard_fraction > 0.0 && discard_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("discard fraction must lie in (0, 1), got {discard_fraction}")));
    }
    let t_end = traj.t_end();
    let t_start = discard_fraction * t_end;
    let origin = traj.origin_index();
    let first = (origin..traj.len())
        .find(|&i| traj.time(i) >= t_start)
        .ok_or_else(|| Error::InvalidArgument("tail window is empty".into()))?;
    let tail = &traj.values()[first..];
    if tail.is_empty() {
        return Err(Error::InvalidArgument("tail window is empty".into()));
    }
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let xs = traj.values();
    let mut entry = None;
    let mut i = xs.len();
    while i > origin && xs[i - 1] > x0 {
        i -= 1;
        entry = Some(i);
    }
    let entry_time = entry.filter(|&i| i <= first).map(|i| traj.time(i));

    Ok(TailStats {
        liminf: lo,
        limsup: hi,
        window: Interval::new(traj.time(first), t_end),
        entry_time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalCheck {
    pub holds: bool,
    /// `m - lo`; negative when the tail dips below the interval.
    pub lower_margin: f64,
    /// `hi - M`; negative when the tail rises above the interval.
    pub upper_margin: f64,
    pub tol: f64,
}

/// `lo - tol <= m` and `M <= hi + tol`.
pub fn verify_interval(stats: &TailStats, interval: Interval, tol: f64) -> IntervalCheck {
    let lower_margin = stats.liminf - interval.lo;
    let upper_margin = interval.hi - stats.limsup;
    IntervalCheck {
        holds: lower_margin >= -tol && upper_margin >= -tol,
        lower_margin,
        upper_margin,
        tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Check {
    pub holds: bool,
    /// `g1([m, M])`.
    pub image: Interval,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub tol: f64,
}

const IMAGE_GRID: usize = 10_000;

/// `[m, M] ⊆ g1([m, M])`, up to `5e-3 (1 + M)`.
pub fn lemma2_check(stats: &TailStats, model: &MapModel, tau: f64) -> Result<Lemma2Check> {
    let (m, big_m) = (stats.liminf, stats.limsup);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=IMAGE_GRID {
        let x = m + (big_m - m) * i as f64 / IMAGE_GRID as f64;
        let y = g1_eval(model, tau, x.max(0.0))?;
        lo = lo.min(y);
        hi = hi.max(y);
    }
    let tol = 5e-3 * (1.0 + big_m);
    let lower_margin = m - lo;
    let upper_margin = hi - big_m;
    Ok(Lemma2Check {
        holds: lower_margin >= -tol && upper_margin >= -tol,
        image: Interval::new(lo, hi),
        lower_margin,
        upper_margin,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mg(mu: f64) -> MapModel {
        MapModel::mackey_glass(2.0, 20.0, mu).unwrap()
    }

    #[test]
    fn equilibrium_is_preserved() {
        let m = mg(1.0);
        let k = positive_fixed_point(&m).unwrap().unwrap();
        let traj = integrate(&m, 0.5, &History::Constant(k), 50.0, 100).unwrap();
        assert!(traj.values().iter().all(|v| (v - k).abs() < 1e-10));
        let s = tail_stats(&traj, 0.5, 0.8).unwrap();
        assert!((s.liminf - k).abs() < 1e-10 && (s.limsup - k).abs() < 1e-10);
        assert_eq!(s.entry_time, Some(0.0));
        let l2 = lemma2_check(&s, &m, 0.5).unwrap();
        assert!(l2.holds);
    }

    #[test]
    fn grid_covers_horizon() {
        let m = mg(1.0);
        let traj = integrate(&m, 1.0, &History::Constant(0.5), 10.0, 50).unwrap();
        assert_eq!(traj.len(), 50 + 1 + 500);
        assert_eq!(traj.time(0), -1.0);
        assert_eq!(traj.time(50), 0.0);
        assert!((traj.t_end() - 10.0).abs() < 1e-12);
        assert_eq!(traj.clamped_steps(), 0);
    }

    #[test]
    fn argument_errors() {
        let m = mg(1.0);
        let h = History::Constant(0.5);
        assert!(matches!(integrate(&m, 1.0, &h, 0.5, 100), Err(Error::InvalidArgument(_))));
        assert!(matches!(integrate(&m, 1.0, &h, 10.0, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(integrate(&m, 0.0, &h, 10.0, 100), Err(Error::InvalidArgument(_))));
        assert!(matches!(integrate(&m, 1.0, &History::Constant(0.0), 10.0, 100), Err(Error::InvalidArgument(_))));
        assert!(matches!(integrate(&m, 1.0, &History::Constant(-1.0), 10.0, 100), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn divergence_is_reported() {
        let m = MapModel::expression("x^3", 1.0).unwrap();
        let err = integrate(&m, 1.0, &History::Constant(2.0), 100.0, 50).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn function_history_matches_constant() {
        let m = mg(1.0);
        let a = integrate(&m, 1.0, &History::Constant(0.7), 5.0, 100).unwrap();
        let b = integrate(&m, 1.0, &History::Function(Arc::new(|_| 0.7)), 5.0, 100).unwrap();
        assert!((a.last() - b.last()).abs() < 1e-12);
        assert_ne!(a.model_digest(), b.model_digest());
    }

    #[test]
    fn exact_solution_with_linear_decay() {
        // On [0, tau] the delayed term is the constant f(c):
        // x(t) = f(c)/mu + (c - f(c)/mu) e^{-mu t}.
        let m = mg(1.3);
        let c = 0.6;
        let traj = integrate(&m, 2.0, &History::Constant(c), 2.0, 200).unwrap();
        let fc = m.f_raw(c);
        let want = fc / 1.3 + (c - fc / 1.3) * (-1.3f64 * 2.0).exp();
        assert!((traj.last() - want).abs() < 1e-10);
    }

    #[test]
    fn tail_stats_of_oscillation() {
        // Hand-built trajectory oscillating across x0.
        let m = mg(1.0);
        let mut traj = integrate(&m, 1.0, &History::Constant(1.0), 10.0, 50).unwrap();
        for (i, v) in traj.x.iter_mut().enumerate() {
            *v = 1.0 + 0.5 * (i as f64 * 0.3).sin();
        }
        let s = tail_stats(&traj, 1.0, 0.8).unwrap();
        assert_eq!(s.entry_time, None);
        assert!(s.liminf < 1.0 && s.limsup > 1.0);
        assert!(matches!(tail_stats(&traj, 1.0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn verify_interval_examples() {
        let s = TailStats { liminf: 1.55, limsup: 2.53, window: Interval::new(0.0, 1.0), entry_time: None };
        assert!(verify_interval(&s, Interval::new(1.54796, 2.53248), 0.01).holds);
        let s = TailStats { liminf: 0.24, limsup: 6.3, ..s };
        let c = verify_interval(&s, Interval::new(0.4261, 5.5653), 0.01);
        assert!(!c.holds && c.lower_margin < 0.0 && c.upper_margin < 0.0);
        assert!(verify_interval(&s, Interval::everything(), 0.0).holds);
    }
}
