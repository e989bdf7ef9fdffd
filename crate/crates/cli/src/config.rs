use std::path::Path;

use kae_core::equivocation::McConfig;
use kae_core::{
    build_family_with, Caps, CipherModel, GroupFamilySpec, LogBase, SymbolDistribution,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedDistribution {
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionConfig {
    Explicit(Vec<f64>),
    Named {
        #[serde(rename = "type")]
        kind: NamedDistribution,
    },
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig::Named {
            kind: NamedDistribution::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// `-` for stdout.
    #[serde(default = "stdout_path")]
    pub path: String,
    #[serde(default)]
    pub format: OutputFormat,
}

fn stdout_path() -> String {
    "-".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            path: stdout_path(),
            format: OutputFormat::Csv,
        }
    }
}

fn default_log_base() -> f64 {
    2.0
}

/// A run description. Lengths are counted in source letters; for position
/// key spaces they must be multiples of the block length `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupFamilySpec,
    #[serde(default)]
    pub distribution: DistributionConfig,
    #[serde(default = "default_log_base")]
    pub log_base: f64,
    #[serde(default)]
    pub lengths: Vec<usize>,
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn base_distribution(&self) -> Result<SymbolDistribution, CliError> {
        match &self.distribution {
            DistributionConfig::Explicit(probs) => Ok(SymbolDistribution::new(probs.clone())?),
            DistributionConfig::Named {
                kind: NamedDistribution::Uniform,
            } => {
                let n = self.group.source_alphabet()?;
                if n == 0 {
                    return Err(CliError::config("alphabet must be nonempty"));
                }
                Ok(SymbolDistribution::uniform(n))
            }
        }
    }

    pub fn model(&self) -> Result<CipherModel, CliError> {
        let base = self.base_distribution()?;
        let log_base = LogBase::new(self.log_base)?;
        Ok(build_family_with(
            &self.group,
            &base,
            log_base,
            Caps::default(),
        )?)
    }

    /// Configured lengths in letters, defaulting to 1..=8 blocks.
    pub fn letter_lengths(&self) -> Vec<usize> {
        if self.lengths.is_empty() {
            let block = self.group.block_len();
            (1..=8).map(|k| k * block).collect()
        } else {
            self.lengths.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config_parses() {
        let cfg = RunConfig::from_json(
            r#"{"group":{"family":"symmetric","n":3},
                "distribution":{"type":"uniform"},
                "log_base":2,
                "lengths":[1,2,3],
                "mc":{"samples":100000,"seed":42},
                "output":{"path":"-","format":"csv"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.group, GroupFamilySpec::Symmetric { n: 3 });
        assert_eq!(
            cfg.mc,
            Some(McConfig {
                samples: 100_000,
                seed: 42
            })
        );
        assert_eq!(cfg.model().unwrap().group().order(), 6);
        let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn defaults_and_explicit_distribution() {
        let cfg = RunConfig::from_json(
            r#"{"group":{"family":"position","d":2,"base_n":2},"distribution":[0.75,0.25]}"#,
        )
        .unwrap();
        assert_eq!(cfg.log_base, 2.0);
        assert_eq!(cfg.letter_lengths(), vec![2, 4, 6, 8, 10, 12, 14, 16]);
        assert_eq!(cfg.output, OutputConfig::default());
        assert_eq!(cfg.model().unwrap().degree(), 4);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(
            RunConfig::from_json(r#"{"group":{"family":"symmetric","n":3},"extra":1}"#).is_err()
        );
        assert!(RunConfig::from_json(r#"{"distribution":[1.0]}"#).is_err());
        let cfg = RunConfig::from_json(
            r#"{"group":{"family":"symmetric","n":3},"distribution":[0.5,0.5]}"#,
        )
        .unwrap();
        assert!(cfg.model().is_err());
        let cfg =
            RunConfig::from_json(r#"{"group":{"family":"symmetric","n":3},"log_base":1}"#).unwrap();
        assert!(cfg.model().is_err());
    }
}
