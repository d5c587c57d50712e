//! Merging a JSON config file with command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use universality_lab::LabError;

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config JSON, unknown keys: exit 2.
    Usage(String),
    /// Errors from the library: exit 1, or 3 for I/O.
    Lab(LabError),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lab(e) if matches!(e.root(), LabError::Io(_)) => 3,
            CliError::Lab(_) => 1,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Reads the config file as a JSON object. A `"command"` key is allowed and
/// must name the command being run.
pub fn load_file(path: &Path, command: &str) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("malformed config {}: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(usage("config must be a JSON object"));
    };
    match map.remove("command") {
        None => {}
        Some(Value::String(c)) if c == command => {}
        Some(other) => return Err(usage(format!("config is for command {other}, not {command}"))),
    }
    Ok(map)
}

/// Flag values that were actually given: nulls and empty lists are dropped.
fn given_flags<F: Serialize>(flags: &F) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(flags).map_err(|e| usage(e.to_string()))? {
        Value::Object(m) => Ok(m
            .into_iter()
            .filter(|(_, v)| !v.is_null() && !matches!(v, Value::Array(a) if a.is_empty()))
            .collect()),
        _ => Err(usage("flags did not serialize to an object")),
    }
}

/// File values overridden by flags, then checked against the parameter type.
pub fn resolve<F: Serialize, P: DeserializeOwned>(file: Option<Map<String, Value>>, flags: &F) -> Result<P, CliError> {
    let mut merged = file.unwrap_or_default();
    merged.extend(given_flags(flags)?);
    serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("invalid configuration: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize)]
    struct Flags {
        res: Option<usize>,
        name: Option<String>,
        list: Vec<f64>,
    }

    #[derive(Deserialize, Debug, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct Params {
        res: usize,
        name: String,
        list: Vec<f64>,
    }

    impl Default for Params {
        fn default() -> Self {
            Params { res: 512, name: "x".into(), list: vec![1.0] }
        }
    }

    fn obj(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn flags_override_file_and_defaults_fill_in() {
        let file = obj(serde_json::json!({"res": 128, "name": "file"}));
        let flags = Flags { res: Some(256), name: None, list: vec![] };
        let p: Params = resolve(Some(file), &flags).unwrap();
        assert_eq!(p, Params { res: 256, name: "file".into(), list: vec![1.0] });
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let file = obj(serde_json::json!({"resolution": 128}));
        let flags = Flags { res: None, name: None, list: vec![] };
        let err = resolve::<_, Params>(Some(file), &flags).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn command_key_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"command":"basin","res":8}"#).unwrap();
        assert!(load_file(&p, "basin").is_ok());
        assert_eq!(load_file(&p, "hull").unwrap_err().exit_code(), 2);
        std::fs::write(&p, "{not json").unwrap();
        assert_eq!(load_file(&p, "basin").unwrap_err().exit_code(), 2);
    }
}
