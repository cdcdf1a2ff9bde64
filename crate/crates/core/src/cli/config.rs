use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coeffs::FormSpec;
use crate::error::{Error, Result};
use crate::sieveweights::{default_gamma, SieveParams, DEFAULT_DELTA};

pub const CACHE_DIR_ENV: &str = "HSGN_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".hsgn-cache";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub form: FormSpec,
    #[serde(rename = "X")]
    pub x: u64,
    pub delta: f64,
    pub gamma: f64,
    pub h: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    pub seed: u64,
    pub samples: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Falls back to $HSGN_CACHE_DIR, then `.hsgn-cache`.
    pub cache_dir: Option<PathBuf>,
    /// Calibration file; the bundled one when absent.
    #[serde(default)]
    pub calibration: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            form: FormSpec::delta(),
            x: 1_000_000,
            delta: DEFAULT_DELTA,
            gamma: default_gamma(),
            h: 50.0,
            big_k: 10.0,
            seed: 0,
            samples: 1000,
            output: None,
            format: OutputFormat::Json,
            cache_dir: None,
            calibration: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.form.validate()?;
        if self.x < 10 {
            return Err(Error::param(format!("X must be at least 10, got {}", self.x)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::param(format!("delta must lie in (0, 0.5), got {}", self.delta)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::param(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.h >= 1.0) {
            return Err(Error::param(format!("h must be at least 1, got {}", self.h)));
        }
        if !(self.big_k > 0.0) {
            return Err(Error::param(format!("K must be positive, got {}", self.big_k)));
        }
        Ok(())
    }

    pub fn sieve_params(&self) -> Result<SieveParams> {
        SieveParams::new(self.x, self.delta, self.gamma)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
