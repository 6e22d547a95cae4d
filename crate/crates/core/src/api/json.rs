//! The one serialization path for everything the API and CLI emit.

use serde::Serialize;
use serde_json::{Number, Value};

/// Significant digits kept for floating-point values.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Round to [`SIGNIFICANT_DIGITS`]; `None` for NaN and infinities.
pub fn round_sig(v: f64) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    if v == 0.0 {
        return Some(0.0);
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().ok()
}

fn normalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            *v = n
                .as_f64()
                .and_then(round_sig)
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        Value::Object(map) => map.values_mut().for_each(normalize),
        _ => {}
    }
}

/// Serialize to a JSON tree with floats rounded and non-finite values as
/// `null`.
pub fn to_value<T: Serialize + ?Sized>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("API types serialize infallibly");
    normalize(&mut v);
    v
}

/// Compact JSON text of [`to_value`].
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    to_value(value).to_string()
}
