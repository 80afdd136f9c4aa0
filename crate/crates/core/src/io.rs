//! Canonical text output: `%.17g` floats and key-sorted JSON.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Formats like C's `printf("%.17g", x)`; non-finite values become `inf`, `-inf`, `nan`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (16 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() {
                    out.push_str(&format_g17(f));
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:", Value::String(k.clone()));
                write_value(out, &m[k]);
            }
            out.push('}');
        }
    }
}

/// Compact JSON with sorted object keys and `%.17g` floats.
pub fn canonical_json_value(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v);
    s
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(canonical_json_value(&serde_json::to_value(value)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn matches_printf_g17() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (-2.5, "-2.5"),
            (1e20, "1e+20"),
            (1.5e-5, "1.5e-05"),
            (0.0001, "0.0001"),
            (123456789.0, "123456789"),
            (1e16, "10000000000000000"),
            (1e17, "1e+17"),
            (2.0f64.sqrt(), "1.4142135623730951"),
            (0.0, "0"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g17(x), s, "{x}");
        }
    }

    #[test]
    fn round_trips_exactly() {
        for &x in &[0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX, -7.25e-9] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn canonical_sorts_keys() {
        let v = json!({"b": 1, "a": [0.5, {"z": true, "y": null}], "c": "q\""});
        assert_eq!(canonical_json_value(&v), r#"{"a":[0.5,{"y":null,"z":true}],"b":1,"c":"q\""}"#);
    }
}
