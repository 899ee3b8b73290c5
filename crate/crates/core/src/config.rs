//! Flat `key = value` parameter files.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys may appear only once. Consumers take the keys they understand and
//! then call [`ParamFile::finish`], which rejects anything left over, so a
//! misspelled key is an error rather than a silently ignored setting.
//!
//! Physical quantities are SI, with ordinary frequencies in Hz. Key names
//! carry their unit as a suffix (`_hz`, `_s`, `_m`, `_rad`, ...).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot parse {value:?} as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("unknown key(s): {}", .0.join(", "))]
    Unknown(Vec<String>),
}

/// A parsed parameter file. Values are consumed by `take_*` calls.
#[derive(Debug, Default, Clone)]
pub struct ParamFile {
    entries: BTreeMap<String, String>,
}

impl ParamFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: idx + 1,
                    key: key.to_string(),
                });
            }
        }
        Ok(ParamFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn take_parsed<T: FromStr>(
        &mut self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(value) => value
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value,
                    expected,
                }),
        }
    }

    pub fn take_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.take_f64_opt(key)?
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn take_f64_opt(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take_parsed::<f64>(key, "a number")? {
            Some(v) if !v.is_finite() => Err(ConfigError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
                expected: "a finite number",
            }),
            other => Ok(other),
        }
    }

    pub fn take_f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.take_f64_opt(key)?.unwrap_or(default))
    }

    pub fn take_usize(&mut self, key: &str) -> Result<usize, ConfigError> {
        self.take_parsed::<usize>(key, "a non-negative integer")?
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn take_usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self
            .take_parsed::<usize>(key, "a non-negative integer")?
            .unwrap_or(default))
    }

    pub fn take_string(&mut self, key: &str) -> Result<String, ConfigError> {
        self.entries
            .remove(key)
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn take_string_or(&mut self, key: &str, default: &str) -> String {
        self.entries
            .remove(key)
            .unwrap_or_else(|| default.to_string())
    }

    /// Fail if any key was not consumed.
    pub fn finish(self) -> Result<(), ConfigError> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Unknown(self.entries.into_keys().collect()))
        }
    }
}
