//! Run manifests: one JSON object per line, written next to a command's
//! main output. Each record carries the fully resolved argument list, so a
//! run can be repeated without the original environment.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub params: BTreeMap<String, Value>,
    /// Arguments after the program name, replayable as-is.
    pub argv: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            params: BTreeMap::new(),
            argv: vec![command.to_string()],
        }
    }

    pub fn input(&mut self, flag: &str, path: &Path) -> &mut Self {
        self.inputs
            .insert(flag.to_string(), path.display().to_string());
        self.arg(flag, path.display().to_string())
    }

    pub fn output(&mut self, flag: &str, path: &Path) -> &mut Self {
        self.outputs
            .insert(flag.to_string(), path.display().to_string());
        self.arg(flag, path.display().to_string())
    }

    pub fn param(&mut self, flag: &str, value: Value, text: String) -> &mut Self {
        self.params.insert(flag.to_string(), value);
        self.arg(flag, text)
    }

    fn arg(&mut self, flag: &str, text: String) -> &mut Self {
        self.argv.push(format!("--{flag}"));
        self.argv.push(text);
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let empty = self
            .inputs
            .iter()
            .chain(&self.outputs)
            .find(|(_, p)| p.is_empty());
        if let Some((k, _)) = empty {
            return Err(CliError::Manifest(format!("empty path for --{k}")));
        }
        if self.argv.first() != Some(&self.command) {
            return Err(CliError::Manifest(
                "argv does not start with the command".into(),
            ));
        }
        Ok(())
    }
}

/// Real number for a JSON field; non-finite values become strings.
pub fn real(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(format!("{v}")), Value::Number)
}

/// Where the manifest of a run writing `out` goes.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.jsonl");
    PathBuf::from(s)
}

pub fn write(out: &Path, m: &RunManifest) -> Result<(), CliError> {
    let path = manifest_path(out);
    let mut line = serde_json::to_string(m).map_err(|e| CliError::Manifest(e.to_string()))?;
    line.push('\n');
    fs::write(&path, line).map_err(|e| CliError::io(&path, e))
}

pub fn read(path: &Path) -> Result<Vec<RunManifest>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let m: RunManifest = serde_json::from_str(l)
                .map_err(|e| CliError::Manifest(format!("line {}: {e}", i + 1)))?;
            m.validate()?;
            Ok(m)
        })
        .collect()
}
