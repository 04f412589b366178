//! Bracketed scalar root finding.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 400;

/// Bisection on `[lo, hi]` until the bracket is narrower than `xtol` or
/// cannot be split further in floating point.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs (or one of them to
/// vanish).
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NotBracketed { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    for _ in 0..MAX_BISECTIONS {
        let m = a + 0.5 * (b - a);
        if b - a <= xtol || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(a + 0.5 * (b - a))
}

/// First adjacent pair of `points` on which `f` changes sign, scanning in
/// order. Returns the pair together with the function values.
pub fn first_sign_change<F, I>(mut f: F, points: I) -> Option<((f64, f64), (f64, f64))>
where
    F: FnMut(f64) -> f64,
    I: IntoIterator<Item = f64>,
{
    let mut prev: Option<(f64, f64)> = None;
    for x in points {
        let fx = f(x);
        if let Some((px, pf)) = prev {
            if pf != 0.0 && fx != 0.0 && pf.signum() != fx.signum() {
                return Some(((px, x), (pf, fx)));
            }
            if fx == 0.0 && pf != 0.0 {
                return Some(((px, x), (pf, fx)));
            }
        }
        prev = Some((x, fx));
    }
    None
}

/// All sign changes of `f` on a uniform grid of `points + 1` nodes over
/// `[lo, hi]`, each refined by bisection.
pub fn scan_roots<F>(f: F, lo: f64, hi: f64, points: usize, xtol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let h = (hi - lo) / points as f64;
    let mut roots = Vec::new();
    let mut xa = lo;
    let mut fa = f(xa);
    for i in 1..=points {
        let xb = if i == points { hi } else { lo + h * i as f64 };
        let fb = f(xb);
        if fa == 0.0 {
            roots.push(xa);
        } else if fb != 0.0 && fa.signum() != fb.signum() && fa.is_finite() && fb.is_finite() {
            if let Ok(r) = bisect(&f, xa, xb, xtol) {
                roots.push(r);
            }
        }
        xa = xb;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(xa);
    }
    roots
}

/// Geometric grid of `count` points from `start` to `end` inclusive.
pub fn geometric_grid(start: f64, end: f64, count: usize) -> impl Iterator<Item = f64> {
    let ratio = (end / start).ln() / (count.max(2) - 1) as f64;
    (0..count).map(move |k| {
        if k + 1 == count {
            end
        } else {
            start * (ratio * k as f64).exp()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_reports_missing_bracket() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotBracketed { .. }));
    }

    #[test]
    fn scan_finds_all_roots_of_cubic() {
        let roots = scan_roots(|x| (x - 0.5) * (x - 1.5) * (x - 2.25), 0.0, 3.0, 1000, 1e-13);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([0.5, 1.5, 2.25]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g: Vec<f64> = geometric_grid(1e-3, 10.0, 5).collect();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert_eq!(g[4], 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
