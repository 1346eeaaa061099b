//! Config file parsing: UTF-8 text, one `key = value` per line, `#` for
//! full-line comments, arrays written as comma-separated lists in square
//! brackets. Command-line flags override file values. Every subcommand
//! validates its map against an allowlist so a typo fails loudly instead
//! of silently running with a default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "line {}: expected `key = value`, got {raw:?}",
                    idx + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(CliError::config(format!("line {}: empty key", idx + 1)));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::config(format!(
                    "line {}: key {key:?} set twice",
                    idx + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Insert or replace a value (used for flag overrides, which win over
    /// file values).
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Deterministically ordered (key, value) view for echoing into output
    /// metadata.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Rejects any key outside `allowed`, naming the offender.
    pub fn check_known(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::config(format!(
                    "unknown config key {key:?}; accepted keys: {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.entries
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string())
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(v).map_err(|m| CliError::config(format!("key {key:?}: {m}"))),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|e| CliError::config(format!("key {key:?}: {e}"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|e| CliError::config(format!("key {key:?}: {e}"))),
        }
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => parse_list(v)?
                .iter()
                .map(|item| parse_f64(item))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|m| CliError::config(format!("key {key:?}: {m}"))),
        }
    }

    pub fn get_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => parse_list(v)?
                .iter()
                .map(|item| item.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| CliError::config(format!("key {key:?}: {e}"))),
        }
    }
}

fn parse_f64(text: &str) -> std::result::Result<f64, String> {
    let v = text
        .parse::<f64>()
        .map_err(|e| format!("{e} (value {text:?})"))?;
    if !v.is_finite() {
        return Err(format!("value {text:?} is not finite"));
    }
    Ok(v)
}

/// Splits a bracketed comma list `[a, b, c]` into trimmed item strings.
fn parse_list(text: &str) -> Result<Vec<String>> {
    let inner = text
        .strip_prefix('[')
        .and_then(|rest| rest.strip_suffix(']'))
        .ok_or_else(|| {
            CliError::config(format!("expected a bracketed list like [1, 2], got {text:?}"))
        })?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
}
