//! Random model generators shared by the integration suites.

#![allow(dead_code)]

use dde_bounds::analysis::condition_l;
use dde_bounds::MapModel;
use rand::Rng;

/// Nicholson with `g'(0) > 1` and `K > x0`: `p/mu` in `(1.05 e, 60)`.
pub fn nicholson<R: Rng>(rng: &mut R) -> MapModel {
    let p = rng.gen_range(0.5..5.0);
    let gamma = rng.gen_range(0.5..3.0);
    let log_ratio = rng.gen_range((1.05 * std::f64::consts::E).ln()..60f64.ln());
    MapModel::nicholson(p, gamma, p / log_ratio.exp()).expect("valid parameters")
}

/// Mackey-Glass with `n` in `[4, 25]` and `K > x0`, i.e. `p/mu > n/(n-1)`.
pub fn mackey_glass<R: Rng>(rng: &mut R) -> MapModel {
    let p = rng.gen_range(1.0..3.0);
    let n = rng.gen_range(4.0..25.0);
    let u = rng.gen_range(0.3..0.98 * (n - 1.0) / n);
    MapModel::mackey_glass(p, n, p * u).expect("valid parameters")
}

pub fn any_model<R: Rng>(rng: &mut R) -> MapModel {
    if rng.gen_bool(0.5) {
        nicholson(rng)
    } else {
        mackey_glass(rng)
    }
}

/// Rejection-sample a model with the requested status of condition (L).
pub fn model_with_l<R: Rng>(rng: &mut R, l_holds: bool) -> MapModel {
    loop {
        let m = any_model(rng);
        if condition_l(&m).expect("standing hypotheses hold") == l_holds {
            return m;
        }
    }
}
