//! Per-node phase sensitivity and the resulting factorial partition.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::ChainNetwork;
use crate::data::{embed_phases, PhaseSample};
use crate::error::{Result, SvqError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityParams {
    pub base_points: usize,
    pub sweep_steps: usize,
    /// A node depends on phase `k` if its sensitivity to `k` is at least
    /// this fraction of its largest sensitivity.
    pub relative_threshold: f64,
    /// Nodes whose largest sensitivity is below this fraction of the
    /// layer-wide maximum are left out of the partition.
    pub inactive_fraction: f64,
    pub seed: u64,
}

impl Default for SensitivityParams {
    fn default() -> Self {
        SensitivityParams {
            base_points: 64,
            sweep_steps: 32,
            relative_threshold: 0.25,
            inactive_fraction: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorialGroups {
    pub layer: usize,
    /// `sensitivity[node][phase]`: mean variance of the node's output as
    /// one phase sweeps a full turn from a data point.
    pub sensitivity: Vec<Vec<f64>>,
    /// Phase set (1-based) each node depends on; `None` for inactive nodes.
    pub node_phases: Vec<Option<BTreeSet<usize>>>,
    /// Responding nodes grouped by phase set, ordered by phase set.
    pub groups: Vec<(BTreeSet<usize>, Vec<usize>)>,
}

impl FactorialGroups {
    /// The distinct phase sets, i.e. the partition of the phases seen by
    /// this layer.
    pub fn phase_sets(&self) -> BTreeSet<BTreeSet<usize>> {
        self.groups.iter().map(|(s, _)| s.clone()).collect()
    }
}

pub fn sensitivity_matrix(
    chain: &ChainNetwork,
    layer: usize,
    samples: &[PhaseSample],
    params: &SensitivityParams,
) -> Result<Vec<Vec<f64>>> {
    if samples.is_empty() {
        return Err(SvqError::EmptyDataset);
    }
    if params.base_points == 0 || params.sweep_steps < 2 {
        return Err(SvqError::invalid(
            "sensitivity",
            "need at least one base point and two sweep steps",
        ));
    }
    let phases = samples[0].phases.len();
    if 2 * phases != chain.input_dim() {
        return Err(SvqError::dims("phases x2", chain.input_dim(), 2 * phases));
    }
    let m = *chain
        .layer_sizes()
        .get(layer)
        .filter(|_| layer > 0)
        .ok_or_else(|| SvqError::invalid("layer", format!("must be in 1..={}", chain.num_stages())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let bases: Vec<&PhaseSample> = samples
        .choose_multiple(&mut rng, params.base_points.min(samples.len()))
        .collect();

    let mut sens = vec![vec![0.0; phases]; m];
    let steps = params.sweep_steps;
    for base in &bases {
        for k in 0..phases {
            let mut sum = vec![0.0; m];
            let mut sum_sq = vec![0.0; m];
            let mut phi = base.phases.clone();
            for s in 0..steps {
                phi[k] = TAU * s as f64 / steps as f64;
                let out = chain.layer_output(&embed_phases(&phi), layer)?;
                for (y, v) in out.iter().enumerate() {
                    sum[y] += v;
                    sum_sq[y] += v * v;
                }
            }
            let t = steps as f64;
            for y in 0..m {
                let var = (sum_sq[y] / t - (sum[y] / t).powi(2)).max(0.0);
                sens[y][k] += var / bases.len() as f64;
            }
        }
    }
    Ok(sens)
}

/// Partitions a layer's nodes by the phases they respond to.
pub fn detect_factorial_groups(
    chain: &ChainNetwork,
    layer: usize,
    samples: &[PhaseSample],
    params: &SensitivityParams,
) -> Result<FactorialGroups> {
    let sensitivity = sensitivity_matrix(chain, layer, samples, params)?;
    Ok(group_by_sensitivity(layer, sensitivity, params))
}

pub fn group_by_sensitivity(
    layer: usize,
    sensitivity: Vec<Vec<f64>>,
    params: &SensitivityParams,
) -> FactorialGroups {
    let layer_max = sensitivity
        .iter()
        .flatten()
        .fold(0.0f64, |a, &v| a.max(v));
    let node_phases: Vec<Option<BTreeSet<usize>>> = sensitivity
        .iter()
        .map(|row| {
            let max = row.iter().fold(0.0f64, |a, &v| a.max(v));
            if layer_max <= 0.0 || max < params.inactive_fraction * layer_max {
                return None;
            }
            Some(
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v >= params.relative_threshold * max)
                    .map(|(k, _)| k + 1)
                    .collect(),
            )
        })
        .collect();
    let mut by_set: BTreeMap<BTreeSet<usize>, Vec<usize>> = BTreeMap::new();
    for (y, set) in node_phases.iter().enumerate() {
        if let Some(set) = set {
            by_set.entry(set.clone()).or_default().push(y);
        }
    }
    FactorialGroups {
        layer,
        sensitivity,
        node_phases,
        groups: by_set.into_iter().collect(),
    }
}
