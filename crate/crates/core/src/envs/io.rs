//! Environment files.
//!
//! A sequence is stored as pretty-printed JSON: `kind`, `T`, `d`, the
//! domain, every segment with its loss parameters (centers, `alpha`,
//! `iota`, `h`, `omega` as a ±1 list) and minimizer, the declared budgets
//! and the seed. Floats round-trip exactly, so an imported instance replays
//! bit-for-bit.

use std::fs;
use std::path::Path;

use super::{EnvError, LossSequence};

pub fn to_string(env: &LossSequence) -> String {
    serde_json::to_string_pretty(env).expect("loss sequences always serialize")
}

/// Parses and validates a sequence.
pub fn from_str(text: &str) -> Result<LossSequence, EnvError> {
    let env: LossSequence = serde_json::from_str(text).map_err(|e| EnvError::Parse(e.to_string()))?;
    env.validate()?;
    Ok(env)
}

pub fn export(env: &LossSequence, path: &Path) -> Result<(), EnvError> {
    fs::write(path, to_string(env) + "\n")
        .map_err(|e| EnvError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn import(path: &Path) -> Result<LossSequence, EnvError> {
    let text = fs::read_to_string(path)
        .map_err(|e| EnvError::Io { path: path.display().to_string(), message: e.to_string() })?;
    from_str(&text)
}
