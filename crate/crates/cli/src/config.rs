use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};

/// Loads a JSON config file, or the defaults when no file is given.
/// Fields missing from the file keep their defaults; flags are applied on
/// top by the caller.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Overwrites a list when the flag was given with at least one value.
pub fn set_list<T>(slot: &mut Vec<T>, flag: Vec<T>) {
    if !flag.is_empty() {
        *slot = flag;
    }
}

/// Resolves a required path from flag or config.
pub fn require(slot: &Option<PathBuf>, flag: &str) -> CliResult<PathBuf> {
    slot.clone().ok_or_else(|| CliError::usage(format!("{flag} is required (flag or config file)")))
}
