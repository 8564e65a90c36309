//! Flat `key = value` defaults files. Precedence is command line, then
//! config file, then built-in defaults; every key mirrors a long flag.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Union of the keys any subcommand understands; one shared file may carry
/// settings for several commands.
const KNOWN_KEYS: [&str; 18] = [
    "seed",
    "jobs",
    "cache-dir",
    "out",
    "tolerance",
    "label",
    "x-max",
    "count",
    "group",
    "n",
    "grid",
    "mode",
    "method",
    "matrices",
    "family-param",
    "t-max",
    "min-kept",
    "bins",
];

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}:{}: expected `key = value`", path.display(), idx + 1);
            };
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                bail!("{}:{}: unknown key {k:?}", path.display(), idx + 1);
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key} = {raw:?}: {e}")),
        }
    }
}

pub fn resolve<T: std::str::FromStr>(cli: Option<T>, cfg: &Config, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = cli {
        return Ok(v);
    }
    Ok(cfg.get(key)?.unwrap_or(default))
}

/// For settings with no sensible default, such as the form label.
pub fn resolve_required<T: std::str::FromStr>(cli: Option<T>, cfg: &Config, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = cli {
        return Ok(v);
    }
    cfg.get(key)?
        .ok_or_else(|| anyhow::anyhow!("--{key} required (flag or config file)"))
}
