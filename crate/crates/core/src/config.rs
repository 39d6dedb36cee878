//! Experiment configuration files (TOML) and the bundled presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisParams;
use crate::chain::ChainSpec;
use crate::data::GeneratorSpec;
use crate::error::{Result, SvqError};
use crate::train::TrainingSchedule;

pub const CIRCLE_PRESET: &str = include_str!("../configs/circle.cfg");
pub const HIER_PRESET: &str = include_str!("../configs/hier.cfg");

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "SVQ_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(flatten)]
    pub generator: GeneratorSpec,
    pub seed: u64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StructureCheck {
    /// Accept the first seed that trains without diverging.
    #[default]
    None,
    /// Factorial / invariant / logic checks for four hierarchical phases.
    Hierarchical,
    /// Every code owns one contiguous arc of the circle.
    CircleArcs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Seeds tried in order; each replaces `schedule.seed`. Empty means
    /// just `schedule.seed`.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub structure_check: StructureCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub out_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub chain: ChainSpec,
    pub schedule: TrainingSchedule,
    pub train: TrainConfig,
    #[serde(default)]
    pub analysis: AnalysisParams,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| SvqError::Config(format!("{origin}: {e}")))?;
        cfg.validate()
            .map_err(|e| SvqError::Config(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SvqError::io(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "circle" => CIRCLE_PRESET,
            "hier" | "hier-phases" => HIER_PRESET,
            other => {
                return Err(SvqError::Config(format!(
                    "unknown preset `{other}` (available: circle, hier)"
                )))
            }
        };
        Self::from_toml(text, &format!("preset {name}"))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SvqError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.schedule.validate(self.chain.num_stages())?;
        self.analysis.validate()?;
        if self.dataset.count == 0 {
            return Err(SvqError::invalid("dataset.count", "must be at least 1"));
        }
        let (_, data_dim) = self.dataset.generator.dims();
        if data_dim != self.chain.layers[0] {
            return Err(SvqError::dims("chain input layer vs data", data_dim, self.chain.layers[0]));
        }
        if self.train.structure_check == StructureCheck::Hierarchical
            && (self.chain.layers.len() != 4
                || !matches!(self.dataset.generator, GeneratorSpec::HierPhases { depth: 2 }))
        {
            return Err(SvqError::invalid(
                "train.structure_check",
                "hierarchical check needs depth-2 phases and a 3-stage chain",
            ));
        }
        if self.train.structure_check == StructureCheck::CircleArcs
            && (self.chain.layers.len() != 2 || self.dataset.generator != GeneratorSpec::Circle)
        {
            return Err(SvqError::invalid(
                "train.structure_check",
                "arc check needs circle data and a single stage",
            ));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.train.seeds.is_empty() {
            vec![self.schedule.seed]
        } else {
            self.train.seeds.clone()
        }
    }
}
