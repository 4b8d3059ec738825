//! Pipeline configuration: a single TOML file plus per-flag overrides.
//! Every command logs the resolved values it runs with, since corpus
//! reproducibility depends on them.

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub extract: ExtractConfig,
    pub split: SplitConfig,
    pub bpe: BpeConfig,
    pub verbose: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractConfig {
    /// Leading component of every metadata line.
    pub metadata_prefix: String,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            metadata_prefix: "github".to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub valid_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            valid_size: 2000,
            test_size: 2000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BpeConfig {
    pub num_merges: usize,
    pub protected: Vec<String>,
    /// Apply punctuation splitting before learning/applying merges.
    pub punct_split: bool,
}

impl Default for BpeConfig {
    fn default() -> Self {
        BpeConfig {
            num_merges: 89_500,
            protected: pycorpus_core::subtok::DEFAULT_PROTECTED
                .iter()
                .map(|s| s.to_string())
                .collect(),
            punct_split: true,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {}", path.display(), e))?;
        let cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {}", path.display(), e))?;
        Ok(cfg)
    }
}
