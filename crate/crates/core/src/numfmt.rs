//! Locale-independent number formatting and a canonical JSON writer.
//!
//! Every float is written with 9 significant digits, trailing zeros
//! trimmed, `inf`/`-inf` for infinities. Objects keep insertion order, so
//! parsing emitted JSON and writing it again reproduces the same bytes.

use serde_json::Value;

pub const SIG_DIGITS: usize = 9;

/// `x` with [`SIG_DIGITS`] significant digits.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// JSON value for a float: a number when finite, otherwise the string
/// `"inf"`/`"-inf"`/`"nan"`.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(format_sig(x))
    }
}

pub fn json_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_num)
}

/// Pretty-printed canonical JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_sig(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|i| matches!(i, Value::Number(_) | Value::String(_) | Value::Null | Value::Bool(_))) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(item, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// One CSV field, quoted when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.2847958085752846), "1.28479581");
        assert_eq!(format_sig(0.00016576985112268288), "0.000165769851");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(-0.5), "-0.5");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert_eq!(format_sig(1.5e-5), "1.5e-5");
        assert_eq!(format_sig(123456789012.0), "1.23456789e11");
        assert_eq!(format_sig(f64::INFINITY), "inf");
        assert_eq!(format_sig(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-1e-300 * 1e-300), "0");
        assert_eq!(format_sig(99999.99999999), "100000");
    }

    #[test]
    fn json_is_canonical() {
        let v = serde_json::json!({"b": 1.0, "a": [0.1, json_num(f64::INFINITY)], "c": {"d": null, "e": "q\"x"}});
        let s = to_json_string(&v);
        let again = to_json_string(&serde_json::from_str(&s).unwrap());
        assert_eq!(s, again);
        assert!(s.starts_with("{\n  \"b\": 1,"));
        assert!(s.contains("\"inf\""));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
