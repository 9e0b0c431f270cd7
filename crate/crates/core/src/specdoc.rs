//! Field accessors for the JSON specification documents. Every error names
//! the dotted key that caused it.

use serde_json::{Map, Value};

use crate::error::SpecError;
use crate::expr::{self, Expr};

pub const MAX_SAMPLES: usize = 10_000_000;

pub fn parse_object(document: &str) -> Result<Map<String, Value>, SpecError> {
    let value: Value =
        serde_json::from_str(document).map_err(|e| SpecError::new("<document>", e.to_string()))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(SpecError::new("<document>", "top level must be an object")),
    }
}

pub fn field<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'a Value, SpecError> {
    obj.get(key)
        .ok_or_else(|| SpecError::new(path, "missing field"))
}

pub fn object<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'a Map<String, Value>, SpecError> {
    field(obj, key, path)?
        .as_object()
        .ok_or_else(|| SpecError::new(path, "expected an object"))
}

pub fn string<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'a str, SpecError> {
    field(obj, key, path)?
        .as_str()
        .ok_or_else(|| SpecError::new(path, "expected a string"))
}

pub fn number_value(value: &Value, path: &str) -> Result<f64, SpecError> {
    let v = value
        .as_f64()
        .ok_or_else(|| SpecError::new(path, "expected a number"))?;
    if !v.is_finite() {
        return Err(SpecError::new(path, "number must be finite"));
    }
    Ok(v)
}

pub fn number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64, SpecError> {
    number_value(field(obj, key, path)?, path)
}

pub fn number_or(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
    default: f64,
) -> Result<f64, SpecError> {
    match obj.get(key) {
        Some(v) => number_value(v, path),
        None => Ok(default),
    }
}

pub fn range(obj: &Map<String, Value>, key: &str, path: &str) -> Result<(f64, f64), SpecError> {
    let arr = field(obj, key, path)?
        .as_array()
        .ok_or_else(|| SpecError::new(path, "expected [lo, hi]"))?;
    if arr.len() != 2 {
        return Err(SpecError::new(path, "expected exactly two numbers"));
    }
    let lo = number_value(&arr[0], &format!("{path}[0]"))?;
    let hi = number_value(&arr[1], &format!("{path}[1]"))?;
    if !(lo < hi) {
        return Err(SpecError::new(
            path,
            format!("lower bound {lo} must be below upper bound {hi}"),
        ));
    }
    Ok((lo, hi))
}

pub fn count(value: &Value, path: &str, min: usize) -> Result<usize, SpecError> {
    let n = value
        .as_u64()
        .ok_or_else(|| SpecError::new(path, "expected a non-negative integer"))?;
    if n < min as u64 {
        return Err(SpecError::new(
            path,
            format!("must be at least {min}, got {n}"),
        ));
    }
    if n > MAX_SAMPLES as u64 {
        return Err(SpecError::new(
            path,
            format!("must not exceed {MAX_SAMPLES}"),
        ));
    }
    Ok(n as usize)
}

pub fn expression(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
    vars: &[&str],
) -> Result<(String, Expr), SpecError> {
    let text = string(obj, key, path)?;
    let e = expr::parse_with_vars(text, vars).map_err(|e| SpecError::new(path, e.to_string()))?;
    Ok((text.to_string(), e))
}

pub fn points<const D: usize>(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<Vec<[f64; D]>, SpecError> {
    let arr = field(obj, key, path)?
        .as_array()
        .ok_or_else(|| SpecError::new(path, "expected an array of points"))?;
    if arr.len() > MAX_SAMPLES {
        return Err(SpecError::new(
            path,
            format!("must not exceed {MAX_SAMPLES} points"),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(i, p)| {
            let p_path = format!("{path}[{i}]");
            let coords = p
                .as_array()
                .filter(|c| c.len() == D)
                .ok_or_else(|| SpecError::new(&p_path, format!("expected {D} coordinates")))?;
            let mut out = [0.0; D];
            for (k, c) in coords.iter().enumerate() {
                out[k] = number_value(c, &format!("{p_path}[{k}]"))?;
            }
            Ok(out)
        })
        .collect()
}

pub fn reject_unknown(
    obj: &Map<String, Value>,
    allowed: &[&str],
    prefix: &str,
) -> Result<(), SpecError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let path = if prefix.is_empty() {
                key.clone()
            } else {
                format!("{prefix}.{key}")
            };
            return Err(SpecError::new(path, "unknown field"));
        }
    }
    Ok(())
}
