//! Flat `key = value` configuration files with command-line overrides.
//!
//! Every run resolves its effective configuration from defaults, then the
//! `--config` file, then explicit flags, and echoes the result into the
//! output directory as `config.echo`. Re-running with that file as
//! `--config` reproduces the run byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct FlatConfig {
    values: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn load(path: &Path) -> Result<FlatConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected `key = value`, got {line:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::usage(format!(
                    "{}:{}: duplicate key {key:?}",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        Ok(FlatConfig { values })
    }

    pub(crate) fn take_raw(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    /// All keys must have been consumed by `resolve` calls.
    pub fn reject_unknown_keys(&self) -> Result<(), CliError> {
        if let Some(key) = self.values.keys().next() {
            return Err(CliError::usage(format!("unknown config key {key:?}")));
        }
        Ok(())
    }
}

/// Tracks the effective configuration for the echo file.
#[derive(Debug, Default)]
pub struct Resolved {
    pairs: BTreeMap<String, String>,
}

impl Resolved {
    /// Precedence: explicit flag, then config file, then default.
    pub fn value<T>(
        &mut self,
        file: &mut FlatConfig,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError>
    where
        T: FromStr + ToString,
    {
        let from_file = file.take_raw(key);
        let value = if let Some(v) = flag {
            v
        } else if let Some(raw) = from_file {
            raw.parse::<T>().map_err(|_| {
                CliError::usage(format!("config key {key:?} has unparseable value {raw:?}"))
            })?
        } else {
            default
        };
        self.pairs.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Optional value with no default; absent keys stay absent.
    pub fn optional<T>(
        &mut self,
        file: &mut FlatConfig,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, CliError>
    where
        T: FromStr + ToString,
    {
        let from_file = file.take_raw(key);
        let value = if let Some(v) = flag {
            Some(v)
        } else if let Some(raw) = from_file {
            Some(raw.parse::<T>().map_err(|_| {
                CliError::usage(format!("config key {key:?} has unparseable value {raw:?}"))
            })?)
        } else {
            None
        };
        if let Some(v) = &value {
            self.pairs.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn record(&mut self, key: &str, value: impl ToString) {
        self.pairs.insert(key.to_string(), value.to_string());
    }

    /// Writes `key = value` lines, sorted by key.
    pub fn write_echo(&self, dir: &Path) -> Result<(), CliError> {
        let mut out = String::new();
        for (key, value) in &self.pairs {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(value);
            out.push('\n');
        }
        let path = dir.join("config.echo");
        fs::write(&path, out)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
    }
}

/// Output directory: the flag, the config file, or
/// `$GAZEMODAL_OUT/<subcommand>`. The destination is environmental, so it
/// is consumed here and never echoed into `config.echo`.
pub fn out_dir(
    file: &mut FlatConfig,
    flag: Option<PathBuf>,
    subcommand: &str,
) -> Result<PathBuf, CliError> {
    let from_file = file.take_raw("out").map(PathBuf::from);
    if let Some(dir) = flag.or(from_file) {
        return Ok(dir);
    }
    if let Ok(root) = std::env::var("GAZEMODAL_OUT") {
        if !root.is_empty() {
            return Ok(PathBuf::from(root).join(subcommand));
        }
    }
    Err(CliError::usage(format!(
        "missing --out for {subcommand} (set it or export GAZEMODAL_OUT)"
    )))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))
}

/// Comma-separated priors like `1,1,1`, normalized downstream.
pub fn parse_priors(raw: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "class_priors must be three comma-separated numbers, got {raw:?}"
        )));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad prior {part:?} in {raw:?}")))?;
    }
    Ok(out)
}

/// Comma-separated channel widths like `8,16,32,64`.
pub fn parse_channels(raw: &str) -> Result<[usize; 4], CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::usage(format!(
            "channels must be four comma-separated widths, got {raw:?}"
        )));
    }
    let mut out = [0; 4];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad channel width {part:?} in {raw:?}")))?;
    }
    Ok(out)
}
