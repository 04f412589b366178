//! Text inputs: model files and CLI argument grammars.
//!
//! Model files are JSON:
//!
//! ```json
//! {"family": "nicholson", "mu": 0.13, "params": {"p": 1, "gamma": 1}}
//! {"family": "mackey_glass", "mu": 1.79, "params": {"p": 2, "n": 20}}
//! {"family": "custom", "mu": 1, "expr": "30*(x + x^2.5)/(2 + 35*x^3)"}
//! ```
//!
//! Missing Nicholson parameters default to `p = gamma = 1`; missing
//! Mackey-Glass parameters to `p = 2, n = 20`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::integrator::History;
use crate::maps::MapModel;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    pub mu: f64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub expr: Option<String>,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Spec(format!("unknown parameter '{k}' for family {}", self.family))),
            None => Ok(()),
        }
    }

    pub fn build(&self) -> Result<MapModel> {
        match self.family.as_str() {
            "nicholson" => {
                self.check_params(&["p", "gamma"])?;
                self.no_expr()?;
                MapModel::nicholson(self.param("p", 1.0), self.param("gamma", 1.0), self.mu)
            }
            "mackey_glass" => {
                self.check_params(&["p", "n"])?;
                self.no_expr()?;
                MapModel::mackey_glass(self.param("p", 2.0), self.param("n", 20.0), self.mu)
            }
            "custom" => {
                self.check_params(&[])?;
                let expr = self.expr.as_deref().ok_or_else(|| Error::Spec("custom family requires \"expr\"".into()))?;
                MapModel::expression(expr, self.mu)
            }
            other => Err(Error::Spec(format!(
                "unknown family '{other}' (expected nicholson, mackey_glass or custom)"
            ))),
        }
    }

    fn no_expr(&self) -> Result<()> {
        if self.expr.is_some() {
            return Err(Error::Spec(format!("\"expr\" is only valid for the custom family, not {}", self.family)));
        }
        Ok(())
    }
}

/// Parse and build a model from spec text.
pub fn parse_model(text: &str) -> Result<MapModel> {
    ModelSpec::from_json(text)?.build()
}

/// `lo:hi:step`, expanded to at least two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

const MAX_RANGE_POINTS: usize = 1_000_000;

impl Range {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!("range must be lo:hi:step, got '{text}'")));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("'{s}' is not a number in range '{text}'")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidArgument(format!("'{s}' is not finite in range '{text}'")))
            }
        };
        let r = Range { lo: num(parts[0])?, hi: num(parts[1])?, step: num(parts[2])? };
        if !(r.step > 0.0) {
            return Err(Error::InvalidArgument(format!("range step must be positive, got {}", r.step)));
        }
        if r.hi < r.lo {
            return Err(Error::InvalidArgument(format!("range is empty: {} > {}", r.lo, r.hi)));
        }
        let n = r.len_unchecked();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("range '{text}' has fewer than 2 points")));
        }
        if n > MAX_RANGE_POINTS {
            return Err(Error::InvalidArgument(format!("range '{text}' has more than {MAX_RANGE_POINTS} points")));
        }
        Ok(r)
    }

    fn len_unchecked(&self) -> usize {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor();
        if n.is_finite() && n >= 0.0 && n < (MAX_RANGE_POINTS * 2) as f64 {
            n as usize + 1
        } else {
            usize::MAX
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len_unchecked()).map(|i| self.lo + self.step * i as f64).collect()
    }
}

/// `const:<c>` or `eq-perturb`.
pub fn parse_history(text: &str) -> Result<History> {
    if text == "eq-perturb" {
        return Ok(History::PerturbedEquilibrium);
    }
    if let Some(c) = text.strip_prefix("const:") {
        let v: f64 = c
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("history constant '{c}' is not a number")))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("history constant must be positive, got {v}")));
        }
        return Ok(History::Constant(v));
    }
    Err(Error::InvalidArgument(format!("history must be const:<c> or eq-perturb, got '{text}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Family;

    #[test]
    fn builds_each_family() {
        let m = parse_model(r#"{"family":"nicholson","mu":0.13,"params":{"p":1,"gamma":1}}"#).unwrap();
        assert_eq!(m.family(), Family::Nicholson);
        let m = parse_model(r#"{"family":"mackey_glass","mu":1.79}"#).unwrap();
        assert!((m.eval_f(1.0).unwrap() - 1.0).abs() < 1e-15);
        let m = parse_model(r#"{"family":"custom","mu":1,"expr":"30*(x+x^2.5)/(2+35*x^3)"}"#).unwrap();
        assert_eq!(m.family(), Family::Custom);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "",
            "{}",
            r#"{"family":"nicholson"}"#,
            r#"{"family":"nicholson","mu":-1}"#,
            r#"{"family":"nicholson","mu":1,"params":{"n":3}}"#,
            r#"{"family":"custom","mu":1}"#,
            r#"{"family":"custom","mu":1,"expr":"sin(x)"}"#,
            r#"{"family":"logistic","mu":1}"#,
            r#"{"family":"nicholson","mu":1,"extra":true}"#,
            r#"{"family":"nicholson","mu":1,"expr":"x"}"#,
        ] {
            assert!(parse_model(bad).is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn ranges() {
        let r = Range::parse("0.09:0.14:0.001").unwrap();
        let p = r.points();
        assert_eq!(p.len(), 51);
        assert!((p[50] - 0.14).abs() < 1e-12);
        for bad in ["", "1:2", "2:1:0.1", "1:2:0", "1:2:-1", "a:b:c", "1:1:1", "0:1e300:1e-300", "nan:1:1"] {
            assert!(Range::parse(bad).is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn histories() {
        assert!(matches!(parse_history("eq-perturb").unwrap(), History::PerturbedEquilibrium));
        assert!(matches!(parse_history("const:1.5").unwrap(), History::Constant(c) if c == 1.5));
        for bad in ["const:", "const:-1", "const:0", "linear", "const:inf"] {
            assert!(parse_history(bad).is_err(), "accepted {bad}");
        }
    }
}
