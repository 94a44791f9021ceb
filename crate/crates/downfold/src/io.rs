//! File input and deterministic report output.

use crate::error::{CliError, CliResult};
use downfold_core::integrals::{parse_fcidump, FcidumpData};
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};

/// Significant digits of every float written to a report.
pub const SIG_DIGITS: usize = 12;

/// `x` rounded to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Round every float inside a JSON value.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        v => v,
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json_string<T: Serialize>(v: &T) -> CliResult<String> {
    let v = serde_json::to_value(v).map_err(|e| CliError::Input(format!("serialization failed: {e}")))?;
    let mut s = serde_json::to_string_pretty(&round_value(v)).map_err(|e| CliError::Input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> CliResult<()> {
    fs::write(path, to_json_string(v)?)?;
    Ok(())
}

/// Float cell for CSV output.
pub fn csv_float(x: f64) -> String {
    format!("{:e}", round_sig(x))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    if !path.exists() {
        return Err(CliError::NotFound(path.display().to_string()));
    }
    Ok(fs::read_to_string(path)?)
}

pub fn read_fcidump(path: &Path) -> CliResult<FcidumpData> {
    Ok(parse_fcidump(&read_text(path)?)?)
}

/// The `.json` file next to an FCIDUMP, holding reference energies.
pub fn sibling_reference(input: &Path) -> Option<Value> {
    let p: PathBuf = input.with_extension("json");
    let text = fs::read_to_string(p).ok()?;
    serde_json::from_str(&text).ok()
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1234567890123456), 0.123456789012);
        assert_eq!(round_sig(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_sig(0.0), 0.0);
        let v = round_value(json!({ "a": [1.0 / 7.0, 3], "b": "x" }));
        assert_eq!(v, json!({ "a": [0.142857142857, 3], "b": "x" }));
        assert_eq!(csv_float(2.5e-9), "2.5e-9");
    }
}
