//! Attractor bounds and delay thresholds for
//!
//! ```text
//! x'(t) = -mu x(t) + f(x(t - tau))
//! ```
//!
//! with unimodal feedback `f`, together with a method-of-steps integrator
//! that checks every bound against simulated solutions.
//!
//! - [`maps`]: feedback models (Nicholson's blowflies, Mackey-Glass, custom
//!   expressions), derivatives up to order three, Schwarzian derivative and
//!   the unimodality check.
//! - [`analysis`]: equilibria, the interval `[g²(x0), g(x0)]`, the 2-cycle of
//!   `g`, conditions (L), (L_tau), (L'_tau) and their thresholds, the
//!   interpolated map `g1`, and the dichotomy classification.
//! - [`integrator`]: fixed-step RK4 with Hermite interpolation of the
//!   delayed argument, tail statistics and interval checks.
//! - [`report`], [`numfmt`], [`input`]: report assembly, canonical number
//!   and JSON formatting, and parsers for the text inputs.
//!
//! ```
//! use dde_bounds::{analysis, MapModel};
//!
//! let model = MapModel::nicholson_normalized(0.13).unwrap();
//! let cycle = analysis::two_cycle(&model).unwrap();
//! assert!((cycle.alpha_bar - 1.54796).abs() < 1e-4);
//! ```

// Comparisons such as `!(x >= 0.0)` are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod expr;
pub mod input;
pub mod integrator;
pub mod jet;
pub mod maps;
pub mod numfmt;
pub mod report;
pub mod roots;

pub use analysis::{DichotomyCase, DichotomyResult, Interval, Threshold};
pub use error::{Error, Hypothesis, Result};
pub use integrator::{History, TailStats, Trajectory};
pub use maps::{Family, MapModel};

#[cfg(test)]
mod tests {
    #[test]
    fn crate_example() {
        let model = crate::MapModel::nicholson_normalized(0.13).unwrap();
        let cycle = crate::analysis::two_cycle(&model).unwrap();
        assert!((cycle.alpha_bar - 1.54796).abs() < 1e-4);
    }
}
