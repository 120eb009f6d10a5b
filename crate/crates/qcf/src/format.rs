//! JSON output with a fixed float format.
//!
//! Every non-integer number is written with 17 significant digits so that
//! identical runs produce byte-identical reports.

use serde_json::{Map, Number, Value};

/// Version tag written into every report.
pub const SCHEMA: &str = "qcf-report/1";

/// `x` with 17 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(
            if x.is_nan() {
                "nan"
            } else if x > 0.0 {
                "inf"
            } else {
                "-inf"
            }
            .into(),
        );
    }
    let text = format!("{x:.16e}");
    serde_json::from_str::<Number>(&text).map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

/// Rewrites every float in `v` (including ones built by `json!`) to the
/// fixed format.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => Value::Number(n),
        Value::Number(n) => n.as_f64().map(num).unwrap_or(Value::Number(n)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Wraps a command payload with the schema and command tags.
pub fn envelope(command: &str, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), Value::String(SCHEMA.into()));
    m.insert("command".into(), Value::String(command.into()));
    match body {
        Value::Object(o) => m.extend(o),
        other => {
            m.insert("result".into(), other);
        }
    }
    canonical(Value::Object(m))
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(-2.0).to_string(), "-2.0000000000000000e+0");
        assert_eq!(num(f64::NAN), Value::String("nan".into()));
    }

    #[test]
    fn canonical_keeps_integers() {
        let v = canonical(serde_json::json!({"a": 3, "b": 0.5, "c": [1.25]}));
        assert_eq!(v["a"].to_string(), "3");
        assert_eq!(v["b"].to_string(), "5.0000000000000000e-1");
        assert_eq!(v["c"][0].to_string(), "1.2500000000000000e+0");
    }
}
