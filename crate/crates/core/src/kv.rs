//! Plain-text `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, later keys override earlier ones.
//! Keys are dotted (`energy.alpha1`); sections are just prefixes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
    origin: String,
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = KvConfig {
            entries: BTreeMap::new(),
            origin: origin.to_string(),
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: lineno + 1,
                    msg: "empty key".into(),
                });
            }
            cfg.entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    /// Applies `other` on top of `self` (CLI overrides on top of a file).
    pub fn merge(&mut self, other: &KvConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(s) => s.parse::<V>().map(Some).map_err(|e| Error::Parse {
                path: self.origin.clone(),
                line: 0,
                msg: format!("key `{key}`: cannot parse `{s}`: {e}"),
            }),
        }
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V>
    where
        V::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<V: FromStr>(&self, key: &str) -> Result<V>
    where
        V::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::invalid("config", format!("missing key `{key}`")))
    }

    /// Comma separated list; missing key yields an empty list.
    pub fn get_list<V: FromStr>(&self, key: &str) -> Result<Vec<V>>
    where
        V::Err: std::fmt::Display,
    {
        let Some(s) = self.entries.get(key) else {
            return Ok(Vec::new());
        };
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<V>().map_err(|e| Error::Parse {
                    path: self.origin.clone(),
                    line: 0,
                    msg: format!("key `{key}`: cannot parse `{p}`: {e}"),
                })
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let cfg = KvConfig::parse("a = 1 # one\n\n# skip\nb=x\na = 2\n", "t").unwrap();
        assert_eq!(cfg.get::<i32>("a").unwrap(), Some(2));
        assert_eq!(cfg.raw("b"), Some("x"));
        assert_eq!(cfg.get::<i32>("c").unwrap(), None);
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(KvConfig::parse("oops\n", "t").is_err());
    }

    #[test]
    fn lists() {
        let cfg = KvConfig::parse("r = 0.05, 0.1,0.2", "t").unwrap();
        assert_eq!(cfg.get_list::<f64>("r").unwrap(), vec![0.05, 0.1, 0.2]);
        assert!(cfg.get_list::<f64>("missing").unwrap().is_empty());
    }
}
