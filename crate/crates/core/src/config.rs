//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! seed = 7
//! mod3.depths = 1, 2, 4, 8
//! l2.lambdas = 0, 0.001, 0.002
//! ```
//!
//! Keys are dotted identifiers; the segment before the first dot names the
//! experiment a key belongs to. Duplicate keys are an error.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|seg| {
            !seg.is_empty()
                && seg
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(ln, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if !valid_key(k) {
                return Err(Error::parse(ln, format!("invalid key `{k}`")));
            }
            if v.is_empty() {
                return Err(Error::parse(ln, format!("empty value for `{k}`")));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::parse(ln, format!("duplicate key `{k}`")));
            }
        }
        Ok(Config { entries })
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> Result<()> {
        if !valid_key(key) {
            return Err(Error::invalid(format!("invalid key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.get_str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::invalid(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    /// Comma-separated list value.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        self.get_str(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim().parse::<T>().map_err(|e| {
                            Error::invalid(format!(
                                "config key `{key}`, item `{}`: {e}",
                                item.trim()
                            ))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on any key under `namespace.` that is not in `known`.
    pub fn check_namespace(&self, namespace: &str, known: &[&str]) -> Result<()> {
        let prefix = format!("{namespace}.");
        for key in self.keys() {
            if let Some(rest) = key.strip_prefix(&prefix) {
                if !known.contains(&rest) {
                    return Err(Error::invalid(format!(
                        "unknown config key `{key}` (known: {})",
                        known.join(", ")
                    )));
                }
            }
        }
        Ok(())
    }

    /// `key = value` lines in key order.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Config::parse(s)
    }
}
