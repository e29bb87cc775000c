//! Flat `key=value` config files. Keys are the long flag names without dashes; `#` starts a
//! comment; `tol` may repeat.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    tols: Vec<String>,
}

pub const KEYS: &[&str] = &[
    "preset",
    "f",
    "g",
    "a",
    "b",
    "domain",
    "nu",
    "mask-gprime",
    "mask-detv",
    "format",
    "out",
    "fd-step",
    "tol",
];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", n + 1));
            }
            let value = value.trim().to_string();
            if key == "tol" {
                cfg.tols.push(value);
            } else {
                cfg.values.insert(key, value);
            }
        }
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn tols(&self) -> &[String] {
        &self.tols
    }
}
