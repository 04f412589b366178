//! Forward-mode differentiation up to third order.
//!
//! A [`Jet`] carries `(u, u', u'', u''')` at a point and propagates them
//! through arithmetic and elementary functions with the Leibniz and Faà di
//! Bruno rules.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; 4]);

/// Product that treats `0 * inf` as zero. Derivative terms multiplied by a
/// vanishing inner derivative must not turn into NaN.
#[inline]
fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl Jet {
    pub fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0])
    }

    pub fn variable(x: f64) -> Self {
        Jet([x, 1.0, 0.0, 0.0])
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn is_constant(&self) -> bool {
        self.0[1] == 0.0 && self.0[2] == 0.0 && self.0[3] == 0.0
    }

    /// Compose with an outer function given its value and first three
    /// derivatives at `self.value()`.
    fn chain(self, phi: [f64; 4]) -> Self {
        let [_, u1, u2, u3] = self.0;
        let d1 = mul0(phi[1], u1);
        let d2 = mul0(phi[2], u1 * u1) + mul0(phi[1], u2);
        let d3 = mul0(phi[3], u1 * u1 * u1) + 3.0 * mul0(phi[2], u1 * u2) + mul0(phi[1], u3);
        Jet([phi[0], d1, d2, d3])
    }

    pub fn exp(self) -> Self {
        let e = self.value().exp();
        self.chain([e; 4])
    }

    pub fn ln(self) -> Self {
        let u = self.value();
        self.chain([u.ln(), 1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)])
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(self) -> Self {
        let u = self.value();
        let r = 1.0 / u;
        self.chain([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    /// `self^a` for a constant exponent.
    pub fn powf(self, a: f64) -> Self {
        let u = self.value();
        let pw = |c: f64, e: f64| -> f64 {
            if c == 0.0 {
                0.0
            } else if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
                c * u.powi(e as i32)
            } else {
                c * u.powf(e)
            }
        };
        self.chain([
            pw(1.0, a),
            pw(a, a - 1.0),
            pw(a * (a - 1.0), a - 2.0),
            pw(a * (a - 1.0) * (a - 2.0), a - 3.0),
        ])
    }

    /// `self^other` with both sides varying.
    pub fn pow(self, other: Jet) -> Self {
        if other.is_constant() {
            self.powf(other.value())
        } else {
            (other * self.ln()).exp()
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let a = self.0;
        Jet([-a[0], -a[1], -a[2], -a[3]])
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (u, v) = (self.0, o.0);
        Jet([
            u[0] * v[0],
            mul0(u[1], v[0]) + mul0(u[0], v[1]),
            mul0(u[2], v[0]) + 2.0 * mul0(u[1], v[1]) + mul0(u[0], v[2]),
            mul0(u[3], v[0])
                + 3.0 * mul0(u[2], v[1])
                + 3.0 * mul0(u[1], v[2])
                + mul0(u[0], v[3]),
        ])
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        if o.is_constant() {
            let c = o.value();
            let a = self.0;
            Jet([a[0] / c, a[1] / c, a[2] / c, a[3] / c])
        } else {
            self * o.recip()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn nicholson_jet_matches_closed_form() {
        // x e^{-x}: derivatives (1-x)e^{-x}, (x-2)e^{-x}, (3-x)e^{-x}
        for &x in &[0.0, 0.3, 1.0, 2.7] {
            let j = Jet::variable(x) * (-Jet::variable(x)).exp();
            let e = (-x).exp();
            assert!(close(j.0[0], x * e));
            assert!(close(j.0[1], (1.0 - x) * e));
            assert!(close(j.0[2], (x - 2.0) * e));
            assert!(close(j.0[3], (3.0 - x) * e));
        }
    }

    #[test]
    fn fractional_power_at_zero_is_finite_where_defined() {
        let j = Jet::variable(0.0).powf(2.5);
        assert_eq!(j.0[0], 0.0);
        assert_eq!(j.0[1], 0.0);
        assert_eq!(j.0[2], 0.0);
        assert!(j.0[3].is_infinite());
    }

    #[test]
    fn quotient_rule() {
        // 1/(1+x^2) at x=1: -1/2, 1/2, 0
        let x = Jet::variable(1.0);
        let j = Jet::constant(1.0) / (Jet::constant(1.0) + x * x);
        assert!(close(j.0[1], -0.5));
        assert!(close(j.0[2], 0.5));
        assert!(j.0[3].abs() < 1e-12);
    }
}
