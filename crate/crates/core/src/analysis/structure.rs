//! Pass/fail structure check for a chain trained on four hierarchical phases.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::activity::{activity_map, classify_encoders, populated_band, ClassifyParams, EncoderLabel};
use crate::analysis::connectivity::{permute_for_clarity, threshold_connectivity_relative};
use crate::analysis::factorial::{detect_factorial_groups, FactorialGroups, SensitivityParams};
use crate::analysis::logic::{extract_logic_relative, LogicReport};
use crate::chain::ChainNetwork;
use crate::data::PhaseSample;
use crate::error::{Result, SvqError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    /// Connectivity threshold as a fraction of each stage's largest
    /// reconstruction component.
    pub threshold: f64,
    /// Logic threshold as a multiple of the connectivity threshold.
    pub logic_factor: f64,
    pub grid: usize,
    pub ratio_threshold: f64,
    pub min_relative_range: f64,
    pub band_min_fraction: f64,
    pub base_points: usize,
    pub sweep_steps: usize,
    pub sensitivity_threshold: f64,
    pub inactive_fraction: f64,
    pub seed: u64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        let c = ClassifyParams::default();
        let s = SensitivityParams::default();
        AnalysisParams {
            threshold: 0.25,
            logic_factor: 1.2,
            grid: 32,
            ratio_threshold: c.ratio_threshold,
            min_relative_range: c.min_relative_range,
            band_min_fraction: c.band_min_fraction,
            base_points: s.base_points,
            sweep_steps: s.sweep_steps,
            sensitivity_threshold: s.relative_threshold,
            inactive_fraction: s.inactive_fraction,
            seed: s.seed,
        }
    }
}

impl AnalysisParams {
    pub fn classify(&self) -> ClassifyParams {
        ClassifyParams {
            ratio_threshold: self.ratio_threshold,
            min_relative_range: self.min_relative_range,
            band_min_fraction: self.band_min_fraction,
        }
    }

    pub fn sensitivity(&self) -> SensitivityParams {
        SensitivityParams {
            base_points: self.base_points,
            sweep_steps: self.sweep_steps,
            relative_threshold: self.sensitivity_threshold,
            inactive_fraction: self.inactive_fraction,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(SvqError::invalid("threshold", "must lie in (0, 1]"));
        }
        if !(self.logic_factor >= 1.0 && self.logic_factor.is_finite()) {
            return Err(SvqError::invalid("logic_factor", "must be at least 1"));
        }
        if self.grid < crate::analysis::activity::MIN_GRID {
            return Err(SvqError::invalid("grid", "must be at least 8"));
        }
        Ok(())
    }
}

/// Labels of one layer over one phase-pair map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSummary {
    pub layer: usize,
    pub axes: (usize, usize),
    pub labels: Vec<EncoderLabel>,
    pub invariant_ratios: Vec<f64>,
}

impl MapSummary {
    pub fn responding(&self) -> usize {
        self.labels.iter().filter(|l| **l != EncoderLabel::Silent).count()
    }

    pub fn all_responding_invariant(&self) -> bool {
        self.responding() > 0
            && self
                .labels
                .iter()
                .all(|l| matches!(l, EncoderLabel::Silent | EncoderLabel::Invariant))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub groups: Vec<FactorialGroups>,
    pub maps: Vec<MapSummary>,
    pub logic: LogicReport,
    pub stage1_factorial: bool,
    pub stage2_invariant_pairs: bool,
    pub stage3_invariant: bool,
    pub complement_logic: bool,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.stage1_factorial && self.stage2_invariant_pairs && self.stage3_invariant && self.complement_logic
    }

    /// First failing check, for error messages.
    pub fn failure(&self) -> Option<String> {
        let set = |l: usize| format!("{:?}", self.groups[l - 1].phase_sets());
        if !self.stage1_factorial {
            Some(format!("stage-1 partition is {}", set(1)))
        } else if !self.stage2_invariant_pairs {
            Some(format!("stage-2 partition is {} or layer-2 nodes not invariant", set(2)))
        } else if !self.stage3_invariant {
            Some("layer-3 nodes not invariant".into())
        } else if !self.complement_logic {
            Some("top-layer expressions are not complement-paired".into())
        } else {
            None
        }
    }
}

fn sets(groups: &[&[usize]]) -> BTreeSet<BTreeSet<usize>> {
    groups.iter().map(|g| g.iter().copied().collect()).collect()
}

/// Runs the factorial, invariance and logic checks on a 3-stage chain over
/// 4 phases.
pub fn check_hierarchical(
    chain: &ChainNetwork,
    samples: &[PhaseSample],
    params: &AnalysisParams,
) -> Result<StructureReport> {
    params.validate()?;
    if chain.num_stages() != 3 || chain.input_dim() != 8 {
        return Err(SvqError::invalid(
            "chain",
            "hierarchical check needs 3 stages over 8 inputs",
        ));
    }
    let sens = params.sensitivity();
    let groups = (1..=3)
        .map(|l| detect_factorial_groups(chain, l, samples, &sens))
        .collect::<Result<Vec<_>>>()?;

    let mut maps = Vec::new();
    for layer in 2..=3 {
        for (axes, fixed) in [((1, 2), [0.0; 4]), ((3, 4), [0.0; 4])] {
            let map = activity_map(chain, layer, axes, &fixed, params.grid)?;
            let band = populated_band(samples, axes, params.grid, params.band_min_fraction)?;
            let cls = classify_encoders(&map, &band, &params.classify())?;
            maps.push(MapSummary {
                layer,
                axes,
                labels: cls.iter().map(|c| c.label).collect(),
                invariant_ratios: cls.iter().map(|c| c.invariant_ratio).collect(),
            });
        }
    }

    let graph = permute_for_clarity(&threshold_connectivity_relative(chain, params.threshold)?);
    let logic = extract_logic_relative(&graph, params.logic_factor)?;

    let stage1_factorial = groups[0].phase_sets() == sets(&[&[1], &[2], &[3], &[4]]);
    let stage2_invariant_pairs = groups[1].phase_sets() == sets(&[&[1, 2], &[3, 4]])
        && maps[..2].iter().all(MapSummary::all_responding_invariant);
    let stage3_invariant = maps[2..].iter().all(MapSummary::all_responding_invariant);
    let complement_logic = logic.complement_pairs().is_some();
    Ok(StructureReport {
        groups,
        maps,
        logic,
        stage1_factorial,
        stage2_invariant_pairs,
        stage3_invariant,
        complement_logic,
    })
}
