use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::PolicyKind;
use crate::environments::{FamilySpec, ModelFamily};
use crate::error::{Error, Result};

/// A family given inline or as a path to a JSON file holding a family spec.
/// Relative paths are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySource {
    File { file: PathBuf },
    Inline(FamilySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySource,
    pub policy: PolicyKind,
    pub horizon: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub output_path: PathBuf,
    #[serde(default = "default_checks")]
    pub checks_enabled: bool,
    /// Noise variance for the Linear–Gaussian policy.
    #[serde(default)]
    pub noise_variance: Option<f64>,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

fn default_checks() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(
        family: FamilySpec,
        policy: PolicyKind,
        horizon: usize,
        replications: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            family: FamilySource::Inline(family),
            policy,
            horizon,
            replications,
            master_seed,
            output_path: PathBuf::from("tsinfo-output"),
            checks_enabled: true,
            noise_variance: None,
            base_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if let Some(v) = self.noise_variance {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "noise_variance must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Loads and validates the family. Validation failures are reported as
    /// configuration errors.
    pub fn resolve_family(&self) -> Result<ModelFamily> {
        let spec = match &self.family {
            FamilySource::Inline(spec) => spec.clone(),
            FamilySource::File { file } => {
                let path = match &self.base_dir {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file.clone(),
                };
                let text = fs::read_to_string(&path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        };
        ModelFamily::from_spec(spec).map_err(|e| match e {
            Error::Io { .. } => e,
            other => Error::Config(format!("invalid family: {other}")),
        })
    }
}
