//! Pipeline-wide settings, loadable from an optional JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abstractive::AbstractiveConfig;
use crate::dataset::FilterConfig;
use crate::error::{Error, Result};
use crate::eval::BootstrapConfig;
use crate::text::DEFAULT_TARGET_WORDS;

/// Every field is optional in the file; missing ones keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub filter: FilterConfig,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: u64,
    pub n_resamples: usize,
    pub percentiles: (f64, f64),
    pub target_words: usize,
    pub abstractive: AbstractiveConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let bootstrap = BootstrapConfig::default();
        Self {
            filter: FilterConfig::default(),
            l: 5,
            seed: 0,
            n_resamples: bootstrap.n_resamples,
            percentiles: (bootstrap.lo_pct, bootstrap.hi_pct),
            target_words: DEFAULT_TARGET_WORDS,
            abstractive: AbstractiveConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn bootstrap(&self) -> BootstrapConfig {
        BootstrapConfig {
            n_resamples: self.n_resamples,
            lo_pct: self.percentiles.0,
            hi_pct: self.percentiles.1,
        }
    }
}
