//! Flat `key=value` experiment configs.
//!
//! ```text
//! # comments and blank lines are ignored
//! problem=logistic
//! data=data/w1a_like_500.libsvm
//! c=1e-4,1e-2,10
//! ```
//!
//! Lists are comma-separated. Every key a command does not know is an error,
//! and relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

#[derive(Debug, Clone)]
pub struct Config {
    base_dir: PathBuf,
    entries: BTreeMap<String, Entry>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base_dir)
    }

    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or_default().trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {line}: expected key=value")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::config(format!("line {line}: empty key")));
            }
            let entry = Entry {
                line,
                value: value.trim().to_string(),
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(CliError::config(format!(
                    "line {line}: duplicate key {key:?} (first set on line {})",
                    prev.line
                )));
            }
        }
        Ok(Config {
            base_dir: base_dir.into(),
            entries,
        })
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&[&str]]) -> Result<()> {
        for (key, entry) in &self.entries {
            if !allowed.iter().any(|set| set.contains(&key.as_str())) {
                return Err(CliError::config(format!("line {}: unknown key {key:?}", entry.line)));
            }
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn require_str(&self, key: &str) -> Result<&str> {
        self.str(key)
            .ok_or_else(|| CliError::config(format!("missing required key {key:?}")))
    }

    fn parse_one<T: FromStr>(&self, key: &str, text: &str) -> Result<T> {
        text.trim().parse().map_err(|_| {
            let line = self.entries.get(key).map_or(0, |e| e.line);
            CliError::config(format!("line {line}: cannot parse {text:?} for key {key:?}"))
        })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.str(key).map(|v| self.parse_one(key, v)).transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| CliError::config(format!("missing required key {key:?}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.str(key) else {
            return Ok(None);
        };
        let items = v
            .split(',')
            .map(|item| self.parse_one(key, item))
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(CliError::config(format!("key {key:?} has an empty list")));
        }
        Ok(Some(items))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.str(key) {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(other) => Err(CliError::config(format!("key {key:?}: expected a boolean, got {other:?}"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.str(key).map(|p| self.base_dir.join(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_lists_and_comments() {
        let cfg = Config::parse("# header\nc = 1e-4, 0.5 ,inf\n\neta=0.1 # trailing\nflag=yes\n", "/tmp").unwrap();
        assert_eq!(cfg.list::<f64>("c").unwrap().unwrap(), vec![1e-4, 0.5, f64::INFINITY]);
        assert_eq!(cfg.get::<f64>("eta").unwrap(), Some(0.1));
        assert!(cfg.bool_or("flag", false).unwrap());
        assert_eq!(cfg.get::<f64>("missing").unwrap(), None);
        assert!(cfg.check_keys(&[&["c", "eta", "flag"]]).is_ok());
        assert!(cfg.check_keys(&[&["c", "eta"]]).is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("no equals sign", ".").is_err());
        assert!(Config::parse("=3", ".").is_err());
        assert!(Config::parse("a=1\na=2", ".").is_err());
        let cfg = Config::parse("eta=fast", ".").unwrap();
        let err = cfg.get::<f64>("eta").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn paths_are_relative_to_the_config() {
        let cfg = Config::parse("data=d/x.libsvm", "/etc/exp").unwrap();
        assert_eq!(cfg.path("data").unwrap(), PathBuf::from("/etc/exp/d/x.libsvm"));
    }
}
