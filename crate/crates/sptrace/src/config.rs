//! Flat `key = value` configuration files and the synthetic instance spec.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Keys use underscores (`obj_tol`); dashes are accepted and
//! normalized. Command-line flags take precedence over file values, which
//! take precedence over built-in defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_").to_ascii_lowercase()
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key = value, found {line:?}"),
            })?;
            let key = normalize(k);
            if key.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    /// Typed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(&normalize(key)) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Usage(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }

    /// `flag`, else the file value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// `flag`, else the file value, else `None`.
    pub fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Parameters of a generated instance, written as
/// `n=60,h=20,k=8,rank=3,support=0.2,sigma=0.1,seed=7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub h: usize,
    pub k: usize,
    pub rank: usize,
    pub support: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 60,
            h: 20,
            k: 8,
            rank: 3,
            support: 0.2,
            sigma: 0.1,
            seed: 0,
        }
    }
}

impl FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut spec = SyntheticSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found {part:?}"))?;
            let bad = |_| format!("cannot parse {v:?} for {k}");
            match k.trim() {
                "n" => spec.n = v.parse().map_err(bad)?,
                "h" => spec.h = v.parse().map_err(bad)?,
                "k" => spec.k = v.parse().map_err(bad)?,
                "rank" => spec.rank = v.parse().map_err(bad)?,
                "support" => spec.support = v.parse().map_err(|_| format!("cannot parse {v:?} for {k}"))?,
                "sigma" => spec.sigma = v.parse().map_err(|_| format!("cannot parse {v:?} for {k}"))?,
                "seed" => spec.seed = v.parse().map_err(|_| format!("cannot parse {v:?} for {k}"))?,
                other => return Err(format!("unknown synthetic key {other:?}")),
            }
        }
        Ok(spec)
    }
}
