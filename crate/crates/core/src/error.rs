use std::fmt;

use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A standing hypothesis of the analysis that a model can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// `g'(0) > 1`; otherwise zero attracts every solution.
    UnstableZero,
    /// A positive equilibrium `K` exists.
    PositiveEquilibrium,
    /// `K > x0`; otherwise `K` is globally attracting.
    EquilibriumPastCritical,
    /// `g²(x0) >= x0`.
    ConditionL,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::UnstableZero => write!(f, "g'(0) ≤ 1: zero is globally attracting"),
            Hypothesis::PositiveEquilibrium => write!(f, "no positive equilibrium K"),
            Hypothesis::EquilibriumPastCritical => {
                write!(f, "K ≤ x0: K is globally attracting (monotone regime)")
            }
            Hypothesis::ConditionL => write!(f, "condition (L) fails: g²(x0) < x0"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {x} is outside the domain [0, inf)")]
    Domain { x: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Schwarzian undefined at critical point x = {x} (f'(x) = {slope:e})")]
    CriticalPoint { x: f64, slope: f64 },
    #[error("f' has no sign change in (0, {x_max}]: not unimodal in window")]
    NotUnimodal { x_max: f64 },
    #[error("inapplicable: {0}")]
    Inapplicable(Hypothesis),
    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("iteration did not converge after {iterations} steps; last bracket [{lo}, {hi}]")]
    NotConverged { iterations: usize, lo: f64, hi: f64 },
    #[error("integration diverged: solution not finite past last valid time t = {t}")]
    Divergence { t: f64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("model spec: {0}")]
    Spec(String),
}

impl Error {
    /// True for errors that come from a failed hypothesis rather than bad
    /// input or numerical trouble.
    pub fn is_inapplicable(&self) -> bool {
        matches!(self, Error::Inapplicable(_))
    }

    /// Numerical failures: non-convergence, missing brackets, divergence.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotBracketed { .. }
                | Error::NotConverged { .. }
                | Error::Divergence { .. }
                | Error::CriticalPoint { .. }
        )
    }
}
