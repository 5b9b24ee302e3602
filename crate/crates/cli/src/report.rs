//! Versioned report envelope shared by every subcommand.

use kgframe::Tolerances;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const REPORT_SCHEMA: &str = "kgframe-report";
pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFile {
    pub schema: String,
    pub version: String,
    /// Arguments after the program name, verbatim.
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub tolerances: Tolerances,
    pub kind: String,
    pub payload: Value,
    pub wall_time_ms: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest(path: &str, bytes: &[u8]) -> InputDigest {
    InputDigest {
        path: path.into(),
        sha256: sha256_hex(bytes),
    }
}

/// Checks the envelope and that every number in it is finite. Returns the
/// first problem found.
pub fn validate(value: &Value) -> Result<(), String> {
    let obj = value.as_object().ok_or("report is not an object")?;
    let expect_str = |key: &str| -> Result<&str, String> {
        obj.get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| format!("missing string field {key}"))
    };
    if expect_str("schema")? != REPORT_SCHEMA {
        return Err("wrong schema name".into());
    }
    if expect_str("version")? != REPORT_VERSION {
        return Err("unsupported report version".into());
    }
    expect_str("kind")?;
    let command = obj
        .get("command")
        .and_then(Value::as_array)
        .ok_or("missing array field command")?;
    if !command.iter().all(Value::is_string) {
        return Err("command must be a list of strings".into());
    }
    let inputs = obj
        .get("inputs")
        .and_then(Value::as_array)
        .ok_or("missing array field inputs")?;
    for input in inputs {
        let sha = input
            .get("sha256")
            .and_then(Value::as_str)
            .ok_or("input without sha256")?;
        if sha.len() != 64 || !sha.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("malformed digest {sha}"));
        }
        input
            .get("path")
            .and_then(Value::as_str)
            .ok_or("input without path")?;
    }
    let tol = obj.get("tolerances").ok_or("missing field tolerances")?;
    serde_json::from_value::<Tolerances>(tol.clone()).map_err(|e| format!("tolerances: {e}"))?;
    let wall = obj
        .get("wallTimeMs")
        .and_then(Value::as_f64)
        .ok_or("missing number wallTimeMs")?;
    if wall < 0.0 {
        return Err("negative wall time".into());
    }
    obj.get("payload").ok_or("missing field payload")?;
    check_finite(value, "$")
}

fn check_finite(value: &Value, at: &str) -> Result<(), String> {
    match value {
        Value::Number(n) => match n.as_f64() {
            Some(x) if x.is_finite() => Ok(()),
            _ => Err(format!("non-finite number at {at}")),
        },
        Value::Array(items) => items
            .iter()
            .enumerate()
            .try_for_each(|(i, v)| check_finite(v, &format!("{at}[{i}]"))),
        Value::Object(map) => map
            .iter()
            .try_for_each(|(k, v)| check_finite(v, &format!("{at}.{k}"))),
        _ => Ok(()),
    }
}
