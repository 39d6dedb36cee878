//! Feed-forward chains of linked quantiser stages.
//!
//! Layer `l` holds the posterior of stage `l` evaluated on layer `l - 1`
//! (layer 0 is the raw input). The chain objective is the λ-weighted sum of
//! each stage's objective on its own input layer.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvqError};
use crate::svq::{PointForward, PosteriorVector, StageGradients, StageObjective, SvqStage};

/// Points per work unit in parallel batch reductions. Partial sums are
/// combined in chunk order, so results do not depend on the thread count.
const REDUCTION_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainNetwork {
    stages: Vec<SvqStage>,
    lambdas: Vec<f64>,
}

/// Layer sizes `M`, per-stage sample counts `n` and weights `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub layers: Vec<usize>,
    pub samples: Vec<usize>,
    pub lambdas: Vec<f64>,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 2 {
            return Err(SvqError::invalid("layers", "need an input layer and at least one stage"));
        }
        let stages = self.layers.len() - 1;
        if self.samples.len() != stages {
            return Err(SvqError::dims("per-stage sample counts", stages, self.samples.len()));
        }
        if self.lambdas.len() != stages {
            return Err(SvqError::dims("per-stage lambdas", stages, self.lambdas.len()));
        }
        if self.layers.iter().any(|&m| m == 0) {
            return Err(SvqError::invalid("layers", "every layer needs at least one node"));
        }
        if self.samples.iter().any(|&n| n == 0) {
            return Err(SvqError::invalid("samples", "sample counts must be at least 1"));
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(SvqError::invalid("lambdas", "weights must be positive and finite"));
        }
        Ok(())
    }

    pub fn num_stages(&self) -> usize {
        self.layers.len() - 1
    }
}

/// Per-stage objectives and their λ-weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainObjective {
    pub stages: Vec<StageObjective>,
    pub weighted_total: f64,
}

/// Gradient of the weighted total for every stage, plus the objective
/// evaluated in the same pass.
#[derive(Debug, Clone)]
pub struct ChainGradients {
    pub stages: Vec<StageGradients>,
    pub objective: ChainObjective,
}

/// How far gradients flow back along the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GradientFlow {
    /// Stage `l` parameters receive gradient from every downstream objective.
    #[default]
    Full,
    /// Stage `l` parameters see only stage `l`'s own objective.
    PerStage,
}

impl ChainNetwork {
    pub fn new(stages: Vec<SvqStage>, lambdas: Vec<f64>) -> Result<Self> {
        let chain = ChainNetwork { stages, lambdas };
        chain.validate()?;
        Ok(chain)
    }

    pub fn zeros(spec: &ChainSpec) -> Result<Self> {
        spec.validate()?;
        let stages = (0..spec.num_stages())
            .map(|l| SvqStage::zeros(spec.layers[l + 1], spec.samples[l], spec.layers[l]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(stages, spec.lambdas.clone())
    }

    /// Every parameter uniform in `[-range, range]`, drawn stage by stage.
    pub fn random<R: Rng + ?Sized>(spec: &ChainSpec, range: f64, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let stages = (0..spec.num_stages())
            .map(|l| SvqStage::random(spec.layers[l + 1], spec.samples[l], spec.layers[l], range, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(stages, spec.lambdas.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(SvqError::invalid("stages", "a chain needs at least one stage"));
        }
        if self.lambdas.len() != self.stages.len() {
            return Err(SvqError::dims("per-stage lambdas", self.stages.len(), self.lambdas.len()));
        }
        for (l, stage) in self.stages.iter().enumerate() {
            stage.validate()?;
            if l > 0 && stage.input_dim() != self.stages[l - 1].m() {
                return Err(SvqError::Invariant(format!(
                    "stage {} input dimension {} does not match stage {} codebook size {}",
                    l + 1,
                    stage.input_dim(),
                    l,
                    self.stages[l - 1].m()
                )));
            }
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(SvqError::invalid("lambdas", "weights must be positive and finite"));
        }
        Ok(())
    }

    pub fn stages(&self) -> &[SvqStage] {
        &self.stages
    }

    pub fn stages_mut(&mut self) -> &mut [SvqStage] {
        &mut self.stages
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn input_dim(&self) -> usize {
        self.stages[0].input_dim()
    }

    /// `M = (input_dim, m_1, ..., m_L)`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.stages.iter().map(|s| s.m()))
            .collect()
    }

    pub fn spec(&self) -> ChainSpec {
        ChainSpec {
            layers: self.layer_sizes(),
            samples: self.stages.iter().map(|s| s.n()).collect(),
            lambdas: self.lambdas.clone(),
        }
    }

    pub fn with_lambdas(&self, lambdas: Vec<f64>) -> Result<Self> {
        Self::new(self.stages.clone(), lambdas)
    }

    /// Posteriors of every layer `1..=L` for input `x0`.
    pub fn feedforward(&self, x0: &[f64]) -> Result<Vec<PosteriorVector>> {
        if x0.len() != self.input_dim() {
            return Err(SvqError::dims("chain input", self.input_dim(), x0.len()));
        }
        Ok(self
            .layers_unchecked(x0)
            .into_iter()
            .map(|probs| PosteriorVector { probs })
            .collect())
    }

    pub(crate) fn layers_unchecked(&self, x0: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.stages.len());
        for (l, stage) in self.stages.iter().enumerate() {
            let input = if l == 0 { x0 } else { &out[l - 1] };
            let next = stage.posterior_unchecked(input);
            out.push(next);
        }
        out
    }

    /// Posterior of a single layer (1-based).
    pub fn layer_output(&self, x0: &[f64], layer: usize) -> Result<Vec<f64>> {
        if layer == 0 || layer > self.stages.len() {
            return Err(SvqError::invalid(
                "layer",
                format!("must be in 1..={}, got {layer}", self.stages.len()),
            ));
        }
        if x0.len() != self.input_dim() {
            return Err(SvqError::dims("chain input", self.input_dim(), x0.len()));
        }
        let mut x = x0.to_vec();
        for stage in &self.stages[..layer] {
            x = stage.posterior_unchecked(&x);
        }
        Ok(x)
    }

    fn check_batch(&self, batch: &[Vec<f64>]) -> Result<()> {
        if batch.is_empty() {
            return Err(SvqError::EmptyBatch);
        }
        let d = self.input_dim();
        if let Some(bad) = batch.iter().find(|x| x.len() != d) {
            return Err(SvqError::dims("chain input", d, bad.len()));
        }
        Ok(())
    }

    /// Every stage's objective on the layer feeding it, and the λ-weighted sum.
    pub fn objective(&self, batch: &[Vec<f64>]) -> Result<ChainObjective> {
        self.check_batch(batch)?;
        let l_count = self.stages.len();
        let partials: Vec<Vec<(f64, f64)>> = batch
            .par_chunks(REDUCTION_CHUNK)
            .map(|chunk| {
                let mut sums = vec![(0.0, 0.0); l_count];
                for x0 in chunk {
                    let mut input = x0.clone();
                    for (l, stage) in self.stages.iter().enumerate() {
                        let fwd = stage.forward_unchecked(&input);
                        let (d1, d2) = stage.point_terms(&input, &fwd);
                        sums[l].0 += d1;
                        sums[l].1 += d2;
                        input = fwd.probs;
                    }
                }
                sums
            })
            .collect();
        let mut sums = vec![(0.0, 0.0); l_count];
        for part in partials {
            for (s, p) in sums.iter_mut().zip(part) {
                s.0 += p.0;
                s.1 += p.1;
            }
        }
        Ok(self.assemble_objective(&sums, batch.len()))
    }

    fn assemble_objective(&self, sums: &[(f64, f64)], count: usize) -> ChainObjective {
        let c = count as f64;
        let stages: Vec<StageObjective> = sums
            .iter()
            .zip(&self.stages)
            .map(|(&(s1, s2), stage)| StageObjective::combine(stage.n(), s1 / c, s2 / c))
            .collect();
        let weighted_total = stages
            .iter()
            .zip(&self.lambdas)
            .map(|(o, l)| l * o.total)
            .sum();
        ChainObjective {
            stages,
            weighted_total,
        }
    }

    /// Analytic gradient of the weighted total with respect to every
    /// parameter of every stage.
    pub fn gradients(&self, batch: &[Vec<f64>], flow: GradientFlow) -> Result<ChainGradients> {
        self.check_batch(batch)?;
        let scale = 1.0 / batch.len() as f64;
        let l_count = self.stages.len();
        let partials: Vec<(Vec<StageGradients>, Vec<(f64, f64)>)> = batch
            .par_chunks(REDUCTION_CHUNK)
            .map(|chunk| {
                let mut grads: Vec<StageGradients> = self
                    .stages
                    .iter()
                    .map(|s| StageGradients::zeros(s.m(), s.input_dim()))
                    .collect();
                let mut sums = vec![(0.0, 0.0); l_count];
                let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(l_count);
                let mut fwds: Vec<PointForward> = Vec::with_capacity(l_count);
                for x0 in chunk {
                    inputs.clear();
                    fwds.clear();
                    let mut input = x0.clone();
                    for (l, stage) in self.stages.iter().enumerate() {
                        let fwd = stage.forward_unchecked(&input);
                        let (d1, d2) = stage.point_terms(&input, &fwd);
                        sums[l].0 += d1;
                        sums[l].1 += d2;
                        let next = fwd.probs.clone();
                        inputs.push(input);
                        fwds.push(fwd);
                        input = next;
                    }
                    let mut upstream: Option<Vec<f64>> = None;
                    for l in (0..l_count).rev() {
                        let g_in = self.stages[l].backward_point(
                            &inputs[l],
                            &fwds[l],
                            scale * self.lambdas[l],
                            upstream.as_deref(),
                            &mut grads[l],
                        );
                        upstream = match flow {
                            GradientFlow::Full => Some(g_in),
                            GradientFlow::PerStage => None,
                        };
                    }
                }
                (grads, sums)
            })
            .collect();

        let mut stages: Vec<StageGradients> = self
            .stages
            .iter()
            .map(|s| StageGradients::zeros(s.m(), s.input_dim()))
            .collect();
        let mut sums = vec![(0.0, 0.0); l_count];
        for (g, s) in partials {
            for (acc, part) in stages.iter_mut().zip(&g) {
                acc.add_assign(part);
            }
            for (acc, part) in sums.iter_mut().zip(s) {
                acc.0 += part.0;
                acc.1 += part.1;
            }
        }
        Ok(ChainGradients {
            stages,
            objective: self.assemble_objective(&sums, batch.len()),
        })
    }

    /// Reorders the nodes of every non-input layer. `perms[l]` applies to
    /// layer `l + 1`; new node `i` is old node `perms[l][i]`. Downstream
    /// input components are permuted to match.
    pub fn permute_layers(&self, perms: &[Vec<usize>]) -> Result<Self> {
        if perms.len() != self.stages.len() {
            return Err(SvqError::dims("layer permutations", self.stages.len(), perms.len()));
        }
        let mut stages = Vec::with_capacity(self.stages.len());
        for (l, stage) in self.stages.iter().enumerate() {
            let mut s = stage.permute_codes(&perms[l])?;
            if l > 0 {
                s = s.permute_inputs(&perms[l - 1])?;
            }
            stages.push(s);
        }
        Self::new(stages, self.lambdas.clone())
    }

    /// Stages (1-based) whose posteriors for every batch input lie within
    /// total variation `tol` of each other.
    pub fn singular_stages(&self, batch: &[Vec<f64>], tol: f64) -> Result<Vec<usize>> {
        self.check_batch(batch)?;
        let layers: Vec<Vec<Vec<f64>>> = batch.iter().map(|x| self.layers_unchecked(x)).collect();
        let mut flagged = Vec::new();
        for l in 0..self.stages.len() {
            let m = self.stages[l].m();
            let mut lo = vec![f64::INFINITY; m];
            let mut hi = vec![f64::NEG_INFINITY; m];
            for point in &layers {
                for (y, &p) in point[l].iter().enumerate() {
                    lo[y] = lo[y].min(p);
                    hi[y] = hi[y].max(p);
                }
            }
            // Upper bound on the pairwise total variation across the batch.
            let spread: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).sum::<f64>() / 2.0;
            if spread < tol {
                flagged.push(l + 1);
            }
        }
        Ok(flagged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(layers: &[usize], lambdas: &[f64]) -> ChainSpec {
        ChainSpec {
            layers: layers.to_vec(),
            samples: vec![3; layers.len() - 1],
            lambdas: lambdas.to_vec(),
        }
    }

    fn random_batch(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn single_stage_chain_matches_stage() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let chain = ChainNetwork::random(&spec(&[3, 4], &[1.0]), 0.5, &mut rng).unwrap();
        let x = [0.2, -0.4, 0.9];
        let out = chain.feedforward(&x).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], chain.stages()[0].posterior(&x).unwrap());
        let batch = random_batch(&mut rng, 9, 3);
        let obj = chain.objective(&batch).unwrap();
        let direct = chain.stages()[0].objective(&batch).unwrap();
        assert_relative_eq!(obj.weighted_total, direct.total, epsilon = 1e-15);
    }

    #[test]
    fn zero_chain_is_uniform_everywhere() {
        let chain = ChainNetwork::zeros(&spec(&[8, 16, 8, 4], &[1.0, 5.0, 0.1])).unwrap();
        let out = chain.feedforward(&[0.5; 8]).unwrap();
        assert_eq!(
            out.iter().map(|p| p.len()).collect::<Vec<_>>(),
            vec![16, 8, 4]
        );
        for p in &out {
            let u = 1.0 / p.len() as f64;
            assert!(p.probs.iter().all(|&v| (v - u).abs() < 1e-15));
        }
    }

    #[test]
    fn lambda_scaling_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let chain = ChainNetwork::random(&spec(&[2, 5, 3], &[1.0, 2.0]), 1.0, &mut rng).unwrap();
        let batch = random_batch(&mut rng, 20, 2);
        let a = chain.objective(&batch).unwrap();
        let doubled = chain.with_lambdas(vec![2.0, 4.0]).unwrap();
        let b = doubled.objective(&batch).unwrap();
        assert_eq!(a.stages, b.stages);
        assert_relative_eq!(b.weighted_total, 2.0 * a.weighted_total, epsilon = 1e-14);
    }

    #[test]
    fn mismatched_stage_dimensions_rejected() {
        let s1 = SvqStage::zeros(4, 1, 2).unwrap();
        let s2 = SvqStage::zeros(3, 1, 5).unwrap();
        assert!(matches!(
            ChainNetwork::new(vec![s1, s2], vec![1.0, 1.0]),
            Err(SvqError::Invariant(_))
        ));
        let chain = ChainNetwork::zeros(&spec(&[2, 3], &[1.0])).unwrap();
        assert!(chain.feedforward(&[1.0]).is_err());
        assert!(chain.objective(&[]).is_err());
    }

    #[test]
    fn permuted_chain_outputs_are_reindexed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chain = ChainNetwork::random(&spec(&[3, 4, 3], &[1.0, 1.0]), 1.0, &mut rng).unwrap();
        let perms = vec![vec![3, 1, 0, 2], vec![2, 0, 1]];
        let permuted = chain.permute_layers(&perms).unwrap();
        let x = [0.3, 0.1, -0.8];
        let a = chain.feedforward(&x).unwrap();
        let b = permuted.feedforward(&x).unwrap();
        for l in 0..2 {
            for (i, &old) in perms[l].iter().enumerate() {
                assert_relative_eq!(b[l].probs[i], a[l].probs[old], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn zero_network_is_singular() {
        let chain = ChainNetwork::zeros(&spec(&[2, 3, 2], &[1.0, 1.0])).unwrap();
        let batch = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(chain.singular_stages(&batch, 1e-3).unwrap(), vec![1, 2]);
    }
}
