//! Unimodal feedback models and their calculus.
//!
//! A [`MapModel`] is a nonlinearity `f` together with the decay rate `mu` of
//! `x'(t) = -mu x(t) + f(x(t - tau))`. The scaled map `g = f / mu` drives
//! most of the analysis.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::roots;

/// Tolerance below which `f'` counts as zero for the Schwarzian.
pub const CRITICAL_SLOPE_TOL: f64 = 1e-12;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Nicholson,
    MackeyGlass,
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Nicholson => "nicholson",
            Family::MackeyGlass => "mackey_glass",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The nonlinearity `f`.
#[derive(Clone)]
pub enum Feedback {
    /// `p x e^{-gamma x}`
    Nicholson { p: f64, gamma: f64 },
    /// `p x / (1 + x^n)`
    MackeyGlass { p: f64, n: f64 },
    /// A parsed expression in `x`, differentiated exactly.
    Expression { source: String, expr: Arc<Expr> },
    /// A closure; derivatives by finite differences unless `df` is given.
    Callback { f: Arc<ScalarFn>, df: Option<Arc<ScalarFn>> },
}

impl fmt::Debug for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feedback::Nicholson { p, gamma } => {
                f.debug_struct("Nicholson").field("p", p).field("gamma", gamma).finish()
            }
            Feedback::MackeyGlass { p, n } => {
                f.debug_struct("MackeyGlass").field("p", p).field("n", n).finish()
            }
            Feedback::Expression { source, .. } => {
                f.debug_struct("Expression").field("source", source).finish()
            }
            Feedback::Callback { df, .. } => {
                f.debug_struct("Callback").field("analytic_df", &df.is_some()).finish()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapModel {
    mu: f64,
    feedback: Feedback,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidModel(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl MapModel {
    pub fn nicholson(p: f64, gamma: f64, mu: f64) -> Result<Self> {
        Ok(MapModel {
            mu: positive("mu", mu)?,
            feedback: Feedback::Nicholson { p: positive("p", p)?, gamma: positive("gamma", gamma)? },
        })
    }

    /// `x'(t) = -mu x(t) + x(t - tau) e^{-x(t - tau)}`.
    pub fn nicholson_normalized(mu: f64) -> Result<Self> {
        Self::nicholson(1.0, 1.0, mu)
    }

    pub fn mackey_glass(p: f64, n: f64, mu: f64) -> Result<Self> {
        let n = positive("n", n)?;
        if n < 1.0 {
            return Err(Error::InvalidModel(format!("n must be at least 1, got {n}")));
        }
        Ok(MapModel { mu: positive("mu", mu)?, feedback: Feedback::MackeyGlass { p: positive("p", p)?, n } })
    }

    /// Parse `source` as `f(x)`. Requires `f(0) = 0`.
    pub fn expression(source: &str, mu: f64) -> Result<Self> {
        let expr = Expr::parse(source)?;
        let f0 = expr.eval(0.0);
        if !(f0.is_finite() && f0.abs() <= 1e-12) {
            return Err(Error::InvalidModel(format!("f(0) must be 0, got {f0}")));
        }
        Ok(MapModel {
            mu: positive("mu", mu)?,
            feedback: Feedback::Expression { source: source.to_string(), expr: Arc::new(expr) },
        })
    }

    pub fn callback<F>(f: F, mu: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::callback_with_derivative(f, None::<fn(f64) -> f64>, mu)
    }

    pub fn callback_with_derivative<F, D>(f: F, df: Option<D>, mu: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f0 = f(0.0);
        if !(f0.is_finite() && f0.abs() <= 1e-12) {
            return Err(Error::InvalidModel(format!("f(0) must be 0, got {f0}")));
        }
        Ok(MapModel {
            mu: positive("mu", mu)?,
            feedback: Feedback::Callback {
                f: Arc::new(f),
                df: df.map(|d| Arc::new(d) as Arc<ScalarFn>),
            },
        })
    }

    /// Same nonlinearity, different decay rate.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Ok(MapModel { mu: positive("mu", mu)?, feedback: self.feedback.clone() })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn feedback(&self) -> &Feedback {
        &self.feedback
    }

    pub fn family(&self) -> Family {
        match self.feedback {
            Feedback::Nicholson { .. } => Family::Nicholson,
            Feedback::MackeyGlass { .. } => Family::MackeyGlass,
            Feedback::Expression { .. } | Feedback::Callback { .. } => Family::Custom,
        }
    }

    /// One-line description, stable across runs.
    pub fn describe(&self) -> String {
        match &self.feedback {
            Feedback::Nicholson { p, gamma } => format!("nicholson(p={p:?}, gamma={gamma:?}, mu={:?})", self.mu),
            Feedback::MackeyGlass { p, n } => format!("mackey_glass(p={p:?}, n={n:?}, mu={:?})", self.mu),
            Feedback::Expression { source, .. } => format!("custom(f={source}, mu={:?})", self.mu),
            Feedback::Callback { .. } => format!("custom(callback, mu={:?})", self.mu),
        }
    }

    /// Normalized Nicholson coordinates `y = gamma x`, `s = p t`: the model
    /// becomes `y' = -(mu/p) y + y(s - p tau) e^{-y(s - p tau)}`. Returns
    /// `(mu / p, p, gamma)`, i.e. the normalized decay rate and the time and
    /// state scale factors.
    pub fn nicholson_normal_form(&self) -> Option<(f64, f64, f64)> {
        match self.feedback {
            Feedback::Nicholson { p, gamma } => Some((self.mu / p, p, gamma)),
            _ => None,
        }
    }

    /// `f(x)` without the domain check. Used on hot paths where `x >= 0`
    /// is already guaranteed.
    #[inline]
    pub(crate) fn f_raw(&self, x: f64) -> f64 {
        match &self.feedback {
            Feedback::Nicholson { p, gamma } => p * x * (-gamma * x).exp(),
            Feedback::MackeyGlass { p, n } => p * x / (1.0 + pow(x, *n)),
            Feedback::Expression { expr, .. } => expr.eval(x),
            Feedback::Callback { f, .. } => f(x),
        }
    }

    #[inline]
    pub(crate) fn g_raw(&self, x: f64) -> f64 {
        self.f_raw(x) / self.mu
    }

    pub fn eval_f(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain { x });
        }
        Ok(self.f_raw(x))
    }

    pub fn eval_g(&self, x: f64) -> Result<f64> {
        Ok(self.eval_f(x)? / self.mu)
    }

    /// `f^{(order)}(x)` for `order` in 1..=3.
    pub fn derivative(&self, x: f64, order: u8) -> Result<f64> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order must be 1, 2 or 3, got {order}")));
        }
        if !(x >= 0.0) {
            return Err(Error::Domain { x });
        }
        if let Feedback::Callback { df: Some(df), .. } = &self.feedback {
            if order == 1 {
                return Ok(df(x));
            }
        }
        Ok(self.derivatives(x)[order as usize])
    }

    /// `[f, f', f'', f''']` at `x >= 0`.
    pub fn derivatives(&self, x: f64) -> [f64; 4] {
        match &self.feedback {
            Feedback::Nicholson { p, gamma } => {
                let e = (-gamma * x).exp();
                let gx = gamma * x;
                [
                    p * x * e,
                    p * (1.0 - gx) * e,
                    p * gamma * (gx - 2.0) * e,
                    p * gamma * gamma * (3.0 - gx) * e,
                ]
            }
            Feedback::MackeyGlass { p, n } => mackey_glass_derivatives(*p, *n, x),
            Feedback::Expression { expr, .. } => expr.eval_jet(x).0,
            Feedback::Callback { f, df } => {
                let fd = |order| finite_difference(f.as_ref(), x, order);
                let mut d = [f(x), fd(1), fd(2), fd(3)];
                if let Some(df) = df {
                    d[1] = df(x);
                }
                d
            }
        }
    }

    /// `[g, g', g'', g''']` at `x >= 0`.
    pub fn g_derivatives(&self, x: f64) -> [f64; 4] {
        self.derivatives(x).map(|v| v / self.mu)
    }

    /// `g'(x)`.
    pub fn g_slope(&self, x: f64) -> Result<f64> {
        Ok(self.derivative(x, 1)? / self.mu)
    }

    /// Schwarzian derivative `f'''/f' - 3/2 (f''/f')^2`.
    pub fn schwarzian(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain { x });
        }
        let [_, d1, d2, d3] = self.derivatives(x);
        if !(d1.abs() > CRITICAL_SLOPE_TOL) {
            return Err(Error::CriticalPoint { x, slope: d1 });
        }
        let r = d2 / d1;
        Ok(d3 / d1 - 1.5 * r * r)
    }

    /// Rough location of the positive fixed point of `g`, used only to size
    /// search windows.
    pub(crate) fn fixed_point_hint(&self) -> Option<f64> {
        match self.feedback {
            Feedback::Nicholson { p, gamma } if p > self.mu => Some((p / self.mu).ln() / gamma),
            Feedback::MackeyGlass { p, n } if p > self.mu => Some((p / self.mu - 1.0).powf(1.0 / n)),
            Feedback::Nicholson { .. } | Feedback::MackeyGlass { .. } => None,
            _ => {
                // g(x) > x just right of 0 when g'(0) > 1; look for the first
                // point past that where g drops below the diagonal.
                let mut above = false;
                for x in roots::geometric_grid(1e-6, 1e6, 400) {
                    let d = self.g_raw(x) - x;
                    if d > 0.0 {
                        above = true;
                    } else if above && d < 0.0 {
                        return Some(x);
                    }
                }
                None
            }
        }
    }

    /// Default window for the unimodality scan: `10 max(1, K)`.
    pub fn default_window(&self) -> f64 {
        let k = self.fixed_point_hint().unwrap_or(1.0);
        let x0 = match self.feedback {
            Feedback::Nicholson { gamma, .. } => 1.0 / gamma,
            _ => 1.0,
        };
        10.0 * k.max(x0).max(1.0)
    }
}

/// `x^e` with exact integer powers where possible.
#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// `c x^e`, zero when `c` is zero even if `x^e` is infinite.
#[inline]
fn term(c: f64, x: f64, e: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * pow(x, e)
    }
}

fn mackey_glass_derivatives(p: f64, n: f64, x: f64) -> [f64; 4] {
    let u = pow(x, n);
    let d = 1.0 + u;
    let dn1 = term(n, x, n - 1.0); // D'
    let f = p * x / d;
    let f1 = p * (1.0 + (1.0 - n) * u) / (d * d);
    // f'' = p n x^{n-1} ((n-1) u - (n+1)) / D^3
    let b = term(n - 1.0, x, 2.0 * n - 1.0) - term(n + 1.0, x, n - 1.0);
    let f2 = p * n * b / (d * d * d);
    let b1 = term((n - 1.0) * (2.0 * n - 1.0), x, 2.0 * n - 2.0) - term((n + 1.0) * (n - 1.0), x, n - 2.0);
    let f3 = p * n * (b1 * d - 3.0 * b * dn1) / (d * d * d * d);
    [f, f1, f2, f3]
}

/// Finite-difference weights for the `order`-th derivative at `z` over the
/// given nodes (Fornberg's recursion).
fn fd_weights(z: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Fourth-order finite difference of `f` at `x >= 0`. Central stencils in the
/// interior; forward stencils when the central one would leave `[0, inf)`.
fn finite_difference(f: &ScalarFn, x: f64, order: usize) -> f64 {
    // Per-order steps balance truncation (h^4) against rounding (eps/h^k).
    let base = match order {
        1 => 1e-3,
        2 => 2e-3,
        _ => 5e-3,
    };
    let h = base * x.abs().max(1.0);
    let half = if order == 3 { 3 } else { 2 };
    let offsets: Vec<f64> = if x - half as f64 * h >= 0.0 {
        (-half..=half).map(|k| k as f64).collect()
    } else {
        (0..(order + 4) as i32).map(|k| k as f64).collect()
    };
    let nodes: Vec<f64> = offsets.iter().map(|k| x + k * h).collect();
    let w = fd_weights(x, &nodes, order);
    nodes.iter().zip(&w).map(|(&xi, &wi)| wi * f(xi)).sum()
}

/// Result of a numerical check of the unimodality hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalCheck {
    /// Exactly one `+ → -` sign change of `f'` on the grid.
    pub is_unimodal: bool,
    pub x0_estimate: f64,
    /// `f'' < 0` on every grid point of `[0, x0]`.
    pub concave_on_rise: bool,
    /// `f(x) >= 0` at every grid point.
    pub nonnegative: bool,
    pub samples_used: usize,
}

/// Sample `f'` on a uniform grid over `(0, x_max]` and locate its sign change.
pub fn check_unimodal(model: &MapModel, x_max: f64, grid_size: usize) -> Result<UnimodalCheck> {
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::InvalidArgument(format!("x_max must be positive, got {x_max}")));
    }
    if grid_size < 100 {
        return Err(Error::InvalidArgument(format!("grid_size must be at least 100, got {grid_size}")));
    }
    let h = x_max / grid_size as f64;
    let slope = |x: f64| model.derivatives(x)[1];

    let mut changes = 0usize;
    let mut first_bracket = None;
    let mut prev_x = 0.0;
    let mut nonnegative = true;
    let mut last_sign = slope(0.0).signum();
    for i in 1..=grid_size {
        let x = h * i as f64;
        let d = slope(x);
        if model.f_raw(x) < 0.0 {
            nonnegative = false;
        }
        if d != 0.0 && d.signum() != last_sign && last_sign != 0.0 {
            changes += 1;
            if first_bracket.is_none() && last_sign > 0.0 {
                first_bracket = Some((prev_x, x));
            }
        }
        if d != 0.0 {
            last_sign = d.signum();
        }
        prev_x = x;
    }
    let Some((lo, hi)) = first_bracket else {
        return Err(Error::NotUnimodal { x_max });
    };
    let x0 = roots::bisect(slope, lo, hi, 0.0)?;

    let mut concave = model.derivatives(0.0)[2] < 0.0;
    let mut i = 1;
    while concave && h * i as f64 <= x0 {
        concave = model.derivatives(h * i as f64)[2] < 0.0;
        i += 1;
    }
    concave = concave && model.derivatives(x0)[2] < 0.0;

    Ok(UnimodalCheck {
        is_unimodal: changes == 1,
        x0_estimate: x0,
        concave_on_rise: concave,
        nonnegative,
        samples_used: grid_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hump_map() -> MapModel {
        MapModel::expression("30*(x + x^(5/2))/(2 + 35*x^3)", 1.0).unwrap()
    }

    #[test]
    fn eval_f_examples() {
        let m = MapModel::nicholson_normalized(1.0).unwrap();
        assert_eq!(m.eval_f(0.0).unwrap(), 0.0);
        assert!((m.eval_f(1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let mg = MapModel::mackey_glass(2.0, 20.0, 1.0).unwrap();
        assert!((mg.eval_f(0.863).unwrap() - 1.6399).abs() < 1e-4);
    }

    #[test]
    fn eval_rejects_negative_and_nan() {
        let m = MapModel::nicholson_normalized(1.0).unwrap();
        assert!(matches!(m.eval_f(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(m.eval_g(f64::NAN), Err(Error::Domain { .. })));
        assert!(matches!(MapModel::nicholson(f64::NAN, 1.0, 1.0), Err(Error::InvalidModel(_))));
        assert!(matches!(MapModel::mackey_glass(2.0, 0.5, 1.0), Err(Error::InvalidModel(_))));
        assert!(matches!(MapModel::nicholson_normalized(0.0), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn eval_g_examples() {
        let m = MapModel::nicholson_normalized(0.13).unwrap();
        assert_eq!(m.eval_g(0.0).unwrap(), 0.0);
        assert!((m.eval_g(2.8298).unwrap() - 1.2848).abs() < 1e-3);
        let m = MapModel::nicholson_normalized(0.05).unwrap();
        assert!((m.eval_g(0.4261).unwrap() - 5.5653).abs() < 1e-3);
    }

    #[test]
    fn derivative_examples() {
        let m = MapModel::nicholson_normalized(1.0).unwrap();
        assert!(m.derivative(1.0, 1).unwrap().abs() < 1e-15);
        assert!((m.derivative(0.0, 2).unwrap() + 2.0).abs() < 1e-15);
        let mg = MapModel::mackey_glass(2.0, 20.0, 1.0).unwrap();
        assert!((mg.derivative(1.0, 1).unwrap() + 9.0).abs() < 1e-12);
        assert!(matches!(m.derivative(1.0, 4), Err(Error::InvalidArgument(_))));
        assert!(matches!(m.derivative(1.0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mackey_glass_closed_form_matches_jets() {
        for &n in &[1.0, 1.5, 2.0, 7.0, 20.0] {
            let src = format!("2*x/(1 + x^{n})");
            let e = Expr::parse(&src).unwrap();
            for &x in &[0.1, 0.5, 0.863, 1.0, 1.7] {
                let closed = mackey_glass_derivatives(2.0, n, x);
                let jet = e.eval_jet(x).0;
                for k in 0..4 {
                    assert!(
                        (closed[k] - jet[k]).abs() <= 1e-9 * (1.0 + jet[k].abs()),
                        "n={n} x={x} k={k}: {} vs {}",
                        closed[k],
                        jet[k]
                    );
                }
            }
        }
    }

    #[test]
    fn finite_differences_match_exact_derivatives() {
        let cb = MapModel::callback(|x: f64| x * (-x).exp(), 1.0).unwrap();
        let exact = MapModel::nicholson_normalized(1.0).unwrap();
        for &x in &[0.0, 0.001, 0.5, 1.0, 3.0, 12.0] {
            let a = cb.derivatives(x);
            let b = exact.derivatives(x);
            for k in 1..4 {
                assert!((a[k] - b[k]).abs() < 1e-6 * (1.0 + b[k].abs()), "x={x} k={k}: {} vs {}", a[k], b[k]);
            }
        }
    }

    #[test]
    fn callback_analytic_first_derivative_is_used() {
        let m = MapModel::callback_with_derivative(|x: f64| x * (-x).exp(), Some(|_x: f64| 42.0), 1.0).unwrap();
        assert_eq!(m.derivative(0.5, 1).unwrap(), 42.0);
    }

    #[test]
    fn schwarzian_examples() {
        let m = MapModel::nicholson_normalized(1.0).unwrap();
        assert!((m.schwarzian(0.0).unwrap() + 3.0).abs() < 1e-12);
        assert!(matches!(m.schwarzian(1.0), Err(Error::CriticalPoint { .. })));
        assert!(hump_map().schwarzian(2.5).unwrap() > 0.0);
    }

    #[test]
    fn unimodal_examples() {
        let m = MapModel::nicholson_normalized(1.0).unwrap();
        let c = check_unimodal(&m, 10.0, 1000).unwrap();
        assert!(c.is_unimodal && c.concave_on_rise && c.nonnegative);
        assert!((c.x0_estimate - 1.0).abs() < 1e-10);

        let mg = MapModel::mackey_glass(2.0, 20.0, 1.0).unwrap();
        let c = check_unimodal(&mg, 5.0, 1000).unwrap();
        assert!(c.is_unimodal);
        assert!((c.x0_estimate - 0.863).abs() < 1e-3);

        let mono = MapModel::expression("x/(1+x)", 1.0).unwrap();
        assert!(matches!(check_unimodal(&mono, 10.0, 1000), Err(Error::NotUnimodal { .. })));
        assert!(matches!(check_unimodal(&m, 10.0, 10), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hump_map_is_single_humped_but_not_concave_near_zero() {
        // g'' ~ 56 sqrt(x) > 0 close to the origin.
        let c = check_unimodal(&hump_map(), 10.0, 2000).unwrap();
        assert!(c.is_unimodal);
        assert!(!c.concave_on_rise);
    }

    #[test]
    fn expression_must_vanish_at_zero() {
        assert!(matches!(MapModel::expression("1 + x", 1.0), Err(Error::InvalidModel(_))));
        assert!(matches!(MapModel::expression("x +", 1.0), Err(Error::Parse(_))));
    }

    #[test]
    fn normal_form() {
        let m = MapModel::nicholson(8.0, 0.5, 1.0).unwrap();
        assert_eq!(m.nicholson_normal_form(), Some((0.125, 8.0, 0.5)));
        assert!(MapModel::mackey_glass(2.0, 20.0, 1.0).unwrap().nicholson_normal_form().is_none());
    }
}
