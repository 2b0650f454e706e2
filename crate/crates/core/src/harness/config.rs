//! Flat `key = value` configuration files.
//!
//! Keys are `T`, `d`, `sigma`, `seed`, `comparator`, plus the prefixed
//! groups `algo.*`, `env.*` and `bob.*` (see [`KEYS`]). Blank lines and
//! lines starting with `#` are ignored. Command-line flags are applied as
//! further overrides on top of the file.

use std::str::FromStr;

use super::RunConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("key `{key}`: {message}")]
    Value { key: String, message: String },
}

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "T",
    "d",
    "sigma",
    "seed",
    "comparator",
    "algo",
    "algo.B",
    "algo.S",
    "algo.Delta",
    "algo.P",
    "algo.curvature",
    "env",
    "env.family",
    "env.domain",
    "env.radius",
    "env.S",
    "env.Delta",
    "env.P",
    "env.alpha",
    "env.file",
    "bob.epoch_len",
    "bob.curvature",
];

/// Splits a file into `(key, value)` pairs, rejecting duplicates and
/// unknown keys.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(ConfigError::Duplicate(k.to_string()));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value { key: key.to_string(), message: e.to_string() })
}

fn parse_real(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => parse(key, value),
    }
}

/// Sets one key.
pub fn apply(config: &mut RunConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    match key {
        "T" => config.horizon = parse(key, value)?,
        "d" => config.d = parse(key, value)?,
        "sigma" => config.sigma = parse_real(key, value)?,
        "seed" => config.seed = parse(key, value)?,
        "comparator" => config.comparator = parse(key, value)?,
        "algo" => config.algo.kind = parse(key, value)?,
        "algo.B" => config.algo.interval_len = Some(parse(key, value)?),
        "algo.S" => config.algo.budgets.switches = Some(parse(key, value)?),
        "algo.Delta" => config.algo.budgets.delta = Some(parse_real(key, value)?),
        "algo.P" => config.algo.budgets.path = Some(parse_real(key, value)?),
        "algo.curvature" => config.algo.budgets.curvature = parse(key, value)?,
        "env" => config.env.kind = parse(key, value)?,
        "env.family" => config.env.family = parse(key, value)?,
        "env.domain" => config.env.domain = parse(key, value)?,
        "env.radius" => config.env.radius = parse_real(key, value)?,
        "env.S" => config.env.switches = Some(parse(key, value)?),
        "env.Delta" => config.env.delta = Some(parse_real(key, value)?),
        "env.P" => config.env.path = Some(parse_real(key, value)?),
        "env.alpha" => config.env.alpha = parse_real(key, value)?,
        "env.file" => config.env.file = Some(value.to_string()),
        "bob.epoch_len" => config.bob.epoch_len = parse(key, value)?,
        "bob.curvature" => config.bob.curvature = Some(parse(key, value)?),
        other => return Err(ConfigError::UnknownKey(other.to_string())),
    }
    Ok(())
}

/// Applies pairs in order; later pairs win.
pub fn apply_overrides<'a>(
    config: &mut RunConfig,
    pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<(), ConfigError> {
    for (k, v) in pairs {
        apply(config, k, v)?;
    }
    Ok(())
}
