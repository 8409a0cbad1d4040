//! Key=value configuration files.
//!
//! A config file supplies fallback values for command-line flags: one
//! `key=value` pair per line, `#` starting a comment, blank lines ignored.
//! Keys use the flag spelling (`shots-per-round`, not `shots_per_round`).
//! Unknown keys are rejected so typos fail loudly instead of silently
//! falling back to defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Flag names a config file may set.
const KNOWN_KEYS: &[&str] = &[
    "energy",
    "dx",
    "steps",
    "shots",
    "seed",
    "epsilon",
    "alpha",
    "shots-per-round",
    "threshold",
    "epsilons",
    "reps",
    "a",
    "b",
    "out",
    "out-dir",
];

/// Parsed config-file contents; empty when no file was given.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Reads and validates a config file, or returns the empty settings
    /// when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected key=value, got {raw:?}",
                    path.display(),
                    lineno + 1
                );
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!(
                    "{}:{}: unknown config key {key:?} (known keys: {})",
                    path.display(),
                    lineno + 1,
                    KNOWN_KEYS.join(", ")
                );
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                bail!("{}:{}: duplicate config key {key:?}", path.display(), lineno + 1);
            }
        }
        Ok(Self { values })
    }

    /// Resolves one parameter: explicit flag, then config file, then default.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(value) => Ok(value),
            None => self.lookup(key).map(|found| found.unwrap_or(default)),
        }
    }

    /// Like [`Settings::resolve`] but without a default; `None` means the
    /// parameter was not supplied anywhere.
    pub fn lookup<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered config key {key:?}");
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key}={raw:?}: {e}")),
            None => Ok(None),
        }
    }

    /// Comma-separated list variant of [`Settings::lookup`].
    pub fn lookup_list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|e| anyhow::anyhow!("config key {key}={raw:?}: {e}"))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
            None => Ok(None),
        }
    }
}
