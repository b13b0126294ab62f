//! TOML configuration files for `run` and `compare`.

use std::path::{Path, PathBuf};

use moea_core::archive::ArchiveConfig;
use moea_core::engine::{Preset, RunConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_out_dir() -> PathBuf {
    PathBuf::from("moea-out")
}

fn default_repeats() -> usize {
    1
}

/// ```toml
/// out_dir = "out"
/// repeats = 3
///
/// [run]
/// problem = "sch"
/// population_size = 20
/// max_evaluations = 2000
/// seed = 1
/// archive = { kind = "grid", capacity = 100 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    pub run: RunConfig,
}

/// One archiver setup in a comparison. The variant inherits everything else
/// from the shared `[run]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    pub archive: ArchiveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareFile {
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    pub run: RunConfig,
    pub variants: Vec<Variant>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    toml::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn check_repeats(repeats: usize) -> Result<(), CliError> {
    if repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    Ok(())
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        parse(path)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_repeats(self.repeats)?;
        self.run.validate()?;
        Ok(())
    }
}

impl CompareFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        parse(path)
    }

    /// The run configuration of each variant, in file order.
    pub fn variant_configs(&self) -> Result<Vec<(String, RunConfig)>, CliError> {
        check_repeats(self.repeats)?;
        if self.variants.len() < 2 {
            return Err(CliError::Usage(format!(
                "compare needs at least two variants, got {}",
                self.variants.len()
            )));
        }
        let mut names: Vec<&str> = self.variants.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Usage("variant names must be unique".into()));
        }
        self.variants
            .iter()
            .map(|v| {
                let mut cfg = self.run.clone();
                cfg.archive = v.archive.clone();
                cfg.preset = v.preset;
                cfg.validate()
                    .map_err(|e| CliError::Usage(format!("variant `{}`: {e}", v.name)))?;
                Ok((v.name.clone(), cfg))
            })
            .collect()
    }
}
