//! A single stochastic vector quantiser stage.
//!
//! The encoder is a normalised bank of sigmoids,
//! `Pr(y|x) = Q(y|x) / sum_y' Q(y'|x)` with `Q(y|x) = sigmoid(w(y).x + b(y))`,
//! and the decoder is linear in the code histogram, `sum_y (nu_y / n) r(y)`.
//! Averaging the decoder's squared error over the multinomial histogram of
//! `n` code samples gives the objective evaluated here:
//!
//! ```text
//! total = (2/n) E[sum_y p(y|x) |x - r(y)|^2] + (2(n-1)/n) E[|x - sum_y p(y|x) r(y)|^2]
//! ```
//!
//! where `E` is the batch mean.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvqError};

/// Parameters of one encoder/decoder pair.
///
/// Weight and reconstruction matrices are stored row-major with one row per
/// code index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvqStage {
    m: usize,
    n: usize,
    input_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    recon: Vec<f64>,
}

/// Normalised code posterior `Pr(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorVector {
    pub probs: Vec<f64>,
}

impl PosteriorVector {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }
}

/// The two distortion terms of a stage and their weighted combination.
///
/// `d1` and `d2` are the unweighted batch means; `total` applies the
/// `2/n` and `2(n-1)/n` factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageObjective {
    pub d1: f64,
    pub d2: f64,
    pub total: f64,
}

impl StageObjective {
    pub fn combine(n: usize, d1: f64, d2: f64) -> Self {
        let (c1, c2) = term_weights(n);
        StageObjective {
            d1,
            d2,
            total: c1 * d1 + c2 * d2,
        }
    }
}

/// Gradients of the batch-mean `total` for each parameter family.
#[derive(Debug, Clone, PartialEq)]
pub struct StageGradients {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub recon: Vec<f64>,
}

impl StageGradients {
    pub fn zeros(m: usize, input_dim: usize) -> Self {
        StageGradients {
            weights: vec![0.0; m * input_dim],
            biases: vec![0.0; m],
            recon: vec![0.0; m * input_dim],
        }
    }

    pub fn add_assign(&mut self, other: &StageGradients) {
        add_into(&mut self.weights, &other.weights);
        add_into(&mut self.biases, &other.biases);
        add_into(&mut self.recon, &other.recon);
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self
            .weights
            .iter_mut()
            .chain(self.biases.iter_mut())
            .chain(self.recon.iter_mut())
        {
            *v *= factor;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .chain(&self.recon)
            .all(|v| v.is_finite())
    }
}

/// Forward quantities for one input, kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct PointForward {
    /// `1 - sigmoid(a)` per code, computed without cancellation.
    pub q_comp: Vec<f64>,
    pub probs: Vec<f64>,
    /// `sum_y p(y) r(y)`.
    pub recon: Vec<f64>,
}

/// Returns `(2/n, 2(n-1)/n)`.
pub fn term_weights(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (2.0 / nf, 2.0 * (nf - 1.0) / nf)
}

/// Logistic function and its complement, evaluated so that `exp` only ever
/// sees a non-positive argument.
#[inline]
pub fn sigmoid_pair(a: f64) -> (f64, f64) {
    if a >= 0.0 {
        let e = (-a).exp();
        let s = 1.0 / (1.0 + e);
        (s, e * s)
    } else {
        let e = a.exp();
        let s = 1.0 / (1.0 + e);
        (e * s, s)
    }
}

#[inline]
pub fn sigmoid(a: f64) -> f64 {
    sigmoid_pair(a).0
}

impl SvqStage {
    pub fn new(
        m: usize,
        n: usize,
        input_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        recon: Vec<f64>,
    ) -> Result<Self> {
        let stage = SvqStage {
            m,
            n,
            input_dim,
            weights,
            biases,
            recon,
        };
        stage.validate()?;
        Ok(stage)
    }

    /// All parameters zero: the posterior is uniform for every input.
    pub fn zeros(m: usize, n: usize, input_dim: usize) -> Result<Self> {
        Self::new(
            m,
            n,
            input_dim,
            vec![0.0; m * input_dim],
            vec![0.0; m],
            vec![0.0; m * input_dim],
        )
    }

    /// Every parameter drawn uniformly from `[-range, range]`.
    pub fn random<R: Rng + ?Sized>(
        m: usize,
        n: usize,
        input_dim: usize,
        range: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(range >= 0.0 && range.is_finite()) {
            return Err(SvqError::invalid("init_range", "must be finite and non-negative"));
        }
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| {
                    if range == 0.0 {
                        0.0
                    } else {
                        rng.gen_range(-range..=range)
                    }
                })
                .collect()
        };
        let weights = draw(m * input_dim);
        let biases = draw(m);
        let recon = draw(m * input_dim);
        Self::new(m, n, input_dim, weights, biases, recon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(SvqError::invalid("m", "codebook size must be at least 1"));
        }
        if self.n == 0 {
            return Err(SvqError::invalid("n", "sample count must be at least 1"));
        }
        if self.input_dim == 0 {
            return Err(SvqError::invalid("input_dim", "must be at least 1"));
        }
        let rows = self.m * self.input_dim;
        if self.weights.len() != rows {
            return Err(SvqError::dims("stage weights", rows, self.weights.len()));
        }
        if self.biases.len() != self.m {
            return Err(SvqError::dims("stage biases", self.m, self.biases.len()));
        }
        if self.recon.len() != rows {
            return Err(SvqError::dims("stage reconstruction vectors", rows, self.recon.len()));
        }
        if !self
            .weights
            .iter()
            .chain(&self.biases)
            .chain(&self.recon)
            .all(|v| v.is_finite())
        {
            return Err(SvqError::NonFinite("stage parameters".into()));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn recon(&self) -> &[f64] {
        &self.recon
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn recon_mut(&mut self) -> &mut [f64] {
        &mut self.recon
    }

    pub fn set_n(&mut self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(SvqError::invalid("n", "sample count must be at least 1"));
        }
        self.n = n;
        Ok(())
    }

    pub fn weight_row(&self, y: usize) -> &[f64] {
        &self.weights[y * self.input_dim..(y + 1) * self.input_dim]
    }

    pub fn recon_row(&self, y: usize) -> &[f64] {
        &self.recon[y * self.input_dim..(y + 1) * self.input_dim]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(SvqError::dims("stage input", self.input_dim, x.len()));
        }
        Ok(())
    }

    /// Sigmoid activation of each code for input `x`.
    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> PointForward {
        let mut q = Vec::with_capacity(self.m);
        let mut q_comp = Vec::with_capacity(self.m);
        for y in 0..self.m {
            let a = dot(self.weight_row(y), x) + self.biases[y];
            let (s, c) = sigmoid_pair(a);
            q.push(s);
            q_comp.push(c);
        }
        let sum: f64 = q.iter().sum();
        let probs: Vec<f64> = q.iter().map(|v| v / sum).collect();
        let recon = self.reconstruct_unchecked(&probs);
        PointForward {
            q_comp,
            probs,
            recon,
        }
    }

    fn reconstruct_unchecked(&self, probs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.input_dim];
        for (y, &p) in probs.iter().enumerate() {
            for (o, r) in out.iter_mut().zip(self.recon_row(y)) {
                *o += p * r;
            }
        }
        out
    }

    /// `Pr(y|x)` for every code index.
    pub fn posterior(&self, x: &[f64]) -> Result<PosteriorVector> {
        self.check_input(x)?;
        Ok(PosteriorVector {
            probs: self.posterior_unchecked(x),
        })
    }

    pub(crate) fn posterior_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = (0..self.m)
            .map(|y| sigmoid(dot(self.weight_row(y), x) + self.biases[y]))
            .collect();
        let sum: f64 = q.iter().sum();
        for v in &mut q {
            *v /= sum;
        }
        q
    }

    /// Linear decoder: `sum_y p(y) r(y)`.
    pub fn reconstruct(&self, p: &PosteriorVector) -> Result<Vec<f64>> {
        if p.len() != self.m {
            return Err(SvqError::dims("posterior length", self.m, p.len()));
        }
        Ok(self.reconstruct_unchecked(&p.probs))
    }

    /// Unweighted per-point distortion terms `(d1, d2)`.
    pub(crate) fn point_terms(&self, x: &[f64], fwd: &PointForward) -> (f64, f64) {
        let d1: f64 = fwd
            .probs
            .iter()
            .enumerate()
            .map(|(y, &p)| p * sq_dist(x, self.recon_row(y)))
            .sum();
        let d2 = sq_dist(x, &fwd.recon);
        (d1, d2)
    }

    /// Batch-mean objective.
    pub fn objective(&self, batch: &[Vec<f64>]) -> Result<StageObjective> {
        if batch.is_empty() {
            return Err(SvqError::EmptyBatch);
        }
        for x in batch {
            self.check_input(x)?;
        }
        let (mut s1, mut s2) = (0.0, 0.0);
        for x in batch {
            let fwd = self.forward_unchecked(x);
            let (d1, d2) = self.point_terms(x, &fwd);
            s1 += d1;
            s2 += d2;
        }
        let count = batch.len() as f64;
        Ok(StageObjective::combine(self.n, s1 / count, s2 / count))
    }

    /// Accumulates `scale * d(total_point)/d(params)` into `grads` and returns
    /// `d/dx` of the same quantity plus the contribution of `upstream`,
    /// which is a gradient with respect to this stage's posterior arriving
    /// from later stages (already scaled).
    pub(crate) fn backward_point(
        &self,
        x: &[f64],
        fwd: &PointForward,
        scale: f64,
        upstream: Option<&[f64]>,
        grads: &mut StageGradients,
    ) -> Vec<f64> {
        let m = self.m;
        let d = self.input_dim;
        let (c1, c2) = term_weights(self.n);
        let residual: Vec<f64> = x.iter().zip(&fwd.recon).map(|(a, b)| a - b).collect();

        // d(total)/d(p_y) and the recon gradient.
        let mut g_p = vec![0.0; m];
        for y in 0..m {
            let r = self.recon_row(y);
            let mut dist = 0.0;
            let mut res_dot_r = 0.0;
            for k in 0..d {
                let diff = x[k] - r[k];
                dist += diff * diff;
                res_dot_r += residual[k] * r[k];
            }
            g_p[y] = scale * (c1 * dist - 2.0 * c2 * res_dot_r);
            let p = fwd.probs[y];
            let g_r = &mut grads.recon[y * d..(y + 1) * d];
            for k in 0..d {
                g_r[k] += scale * (-2.0 * c1 * p * (x[k] - r[k]) - 2.0 * c2 * p * residual[k]);
            }
        }
        if let Some(up) = upstream {
            for (g, u) in g_p.iter_mut().zip(up) {
                *g += u;
            }
        }

        // Through the normalisation: dp_y/da_k = (1 - q_k) p_k (delta_yk - p_y).
        let mean_g: f64 = g_p.iter().zip(&fwd.probs).map(|(g, p)| g * p).sum();
        let mut g_x: Vec<f64> = (0..d)
            .map(|k| scale * (2.0 * c1 * (x[k] - fwd.recon[k]) + 2.0 * c2 * residual[k]))
            .collect();
        // The d1 term's direct dependence on x is 2 sum_y p_y (x - r_y) = 2 (x - xhat),
        // identical in form to the d2 term.
        for y in 0..m {
            let g_a = fwd.q_comp[y] * fwd.probs[y] * (g_p[y] - mean_g);
            grads.biases[y] += g_a;
            let w = self.weight_row(y);
            let g_w = &mut grads.weights[y * d..(y + 1) * d];
            for k in 0..d {
                g_w[k] += g_a * x[k];
                g_x[k] += g_a * w[k];
            }
        }
        g_x
    }

    /// Exact gradients of `objective(batch).total`.
    pub fn gradients(&self, batch: &[Vec<f64>]) -> Result<StageGradients> {
        if batch.is_empty() {
            return Err(SvqError::EmptyBatch);
        }
        for x in batch {
            self.check_input(x)?;
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grads = StageGradients::zeros(self.m, self.input_dim);
        for x in batch {
            let fwd = self.forward_unchecked(x);
            self.backward_point(x, &fwd, scale, None, &mut grads);
        }
        Ok(grads)
    }

    /// Applies `param -= step * grad` per family.
    pub fn apply_step(&mut self, grads: &StageGradients, steps: [f64; 3]) {
        for (p, g) in self.weights.iter_mut().zip(&grads.weights) {
            *p -= steps[0] * g;
        }
        for (p, g) in self.biases.iter_mut().zip(&grads.biases) {
            *p -= steps[1] * g;
        }
        for (p, g) in self.recon.iter_mut().zip(&grads.recon) {
            *p -= steps[2] * g;
        }
    }

    /// Reorders code indices: new code `i` is old code `perm[i]`.
    pub fn permute_codes(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.m)?;
        let d = self.input_dim;
        let mut weights = Vec::with_capacity(self.weights.len());
        let mut recon = Vec::with_capacity(self.recon.len());
        let mut biases = Vec::with_capacity(self.m);
        for &old in perm {
            weights.extend_from_slice(&self.weights[old * d..(old + 1) * d]);
            recon.extend_from_slice(&self.recon[old * d..(old + 1) * d]);
            biases.push(self.biases[old]);
        }
        Self::new(self.m, self.n, d, weights, biases, recon)
    }

    /// Reorders input components: new component `k` is old component
    /// `perm[k]`, applied to both weight and reconstruction rows.
    pub fn permute_inputs(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.input_dim)?;
        let d = self.input_dim;
        let remap = |src: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(src.len());
            for y in 0..self.m {
                let row = &src[y * d..(y + 1) * d];
                out.extend(perm.iter().map(|&old| row[old]));
            }
            out
        };
        Self::new(
            self.m,
            self.n,
            d,
            remap(&self.weights),
            self.biases.clone(),
            remap(&self.recon),
        )
    }
}

pub(crate) fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(SvqError::dims("permutation", len, perm.len()));
    }
    let mut seen = vec![false; len];
    for &i in perm {
        if i >= len || seen[i] {
            return Err(SvqError::invalid("permutation", "not a bijection"));
        }
        seen[i] = true;
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_code_stage(a1: f64, a2: f64) -> SvqStage {
        // input_dim 1, x = 1: activation is w + b
        SvqStage::new(2, 3, 1, vec![a1, a2], vec![0.0, 0.0], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn zero_parameters_give_uniform_posterior() {
        let stage = SvqStage::zeros(5, 3, 4).unwrap();
        let p = stage.posterior(&[0.3, -1.0, 2.0, 7.0]).unwrap();
        for v in &p.probs {
            assert_relative_eq!(*v, 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_code_posterior_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stage = SvqStage::random(1, 4, 2, 1.0, &mut rng).unwrap();
        assert_eq!(stage.posterior(&[0.5, 0.5]).unwrap().probs, vec![1.0]);
    }

    #[test]
    fn two_code_posterior_arithmetic() {
        let stage = two_code_stage(0.0, 3f64.ln());
        let p = stage.posterior(&[1.0]).unwrap();
        assert_relative_eq!(p.probs[0], 0.4, epsilon = 1e-15);
        assert_relative_eq!(p.probs[1], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn posterior_rejects_wrong_dimension() {
        let stage = SvqStage::zeros(2, 1, 3).unwrap();
        assert!(matches!(
            stage.posterior(&[1.0, 2.0]),
            Err(SvqError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sigmoid_is_stable_for_large_activations() {
        let (s, c) = sigmoid_pair(800.0);
        assert_eq!(s, 1.0);
        assert!(c >= 0.0 && c.is_finite());
        let (s, c) = sigmoid_pair(-800.0);
        assert_eq!(c, 1.0);
        assert!(s >= 0.0);
        let stage = SvqStage::new(2, 1, 1, vec![1e6, -1e6], vec![0.0, 0.0], vec![0.0; 2]).unwrap();
        let p = stage.posterior(&[1.0]).unwrap();
        assert!(p.probs.iter().all(|v| v.is_finite()));
        assert_relative_eq!(p.probs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn reconstruct_cases() {
        let stage =
            SvqStage::new(2, 1, 2, vec![0.0; 4], vec![0.0; 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let onehot = PosteriorVector {
            probs: vec![0.0, 1.0],
        };
        assert_eq!(stage.reconstruct(&onehot).unwrap(), vec![0.0, 1.0]);
        let p = PosteriorVector {
            probs: vec![0.25, 0.75],
        };
        assert_eq!(stage.reconstruct(&p).unwrap(), vec![0.25, 0.75]);

        let balanced =
            SvqStage::new(2, 1, 2, vec![0.0; 4], vec![0.0; 2], vec![1.0, -2.0, -1.0, 2.0]).unwrap();
        let uniform = PosteriorVector {
            probs: vec![0.5, 0.5],
        };
        assert_eq!(balanced.reconstruct(&uniform).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let stage = SvqStage::zeros(2, 1, 1).unwrap();
        assert!(matches!(stage.objective(&[]), Err(SvqError::EmptyBatch)));
        assert!(matches!(stage.gradients(&[]), Err(SvqError::EmptyBatch)));
    }

    #[test]
    fn single_sample_limit_is_twice_d1() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let stage = SvqStage::random(4, 1, 3, 1.0, &mut rng).unwrap();
        let batch: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let obj = stage.objective(&batch).unwrap();
        assert_eq!(obj.total, 2.0 * obj.d1);
    }

    #[test]
    fn symmetric_split_objective() {
        // p = (1/2, 1/2) by zero weights; recon = x +/- delta
        let x = [0.3, -0.7];
        let delta = [0.2, 0.5];
        let recon = vec![x[0] + delta[0], x[1] + delta[1], x[0] - delta[0], x[1] - delta[1]];
        for n in [1usize, 2, 5, 20] {
            let stage = SvqStage::new(2, n, 2, vec![0.0; 4], vec![0.0; 2], recon.clone()).unwrap();
            let obj = stage.objective(&[x.to_vec()]).unwrap();
            let delta_sq = delta[0] * delta[0] + delta[1] * delta[1];
            assert_relative_eq!(obj.d1, delta_sq, epsilon = 1e-15);
            assert_relative_eq!(obj.d2, 0.0, epsilon = 1e-15);
            assert_relative_eq!(obj.total, 2.0 * delta_sq / n as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn exact_one_hot_reconstruction_has_zero_objective() {
        // Two points, two codes pinned by huge activations, recon at the points.
        let stage = SvqStage::new(
            2,
            7,
            1,
            vec![800.0, -800.0],
            vec![0.0, 0.0],
            vec![1.0, -1.0],
        )
        .unwrap();
        let obj = stage.objective(&[vec![1.0], vec![-1.0]]).unwrap();
        assert_eq!(obj.total, 0.0);
    }

    #[test]
    fn recon_gradient_vanishes_at_stationary_point() {
        let c = [0.4, -0.1, 0.25];
        let stage =
            SvqStage::new(3, 5, 3, vec![0.0; 9], vec![0.0; 3], c.repeat(3)).unwrap();
        let g = stage.gradients(&[c.to_vec()]).unwrap();
        assert!(g.recon.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn permuting_codes_preserves_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let stage = SvqStage::random(4, 3, 2, 1.0, &mut rng).unwrap();
        let batch: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let permuted = stage.permute_codes(&[2, 0, 3, 1]).unwrap();
        assert_relative_eq!(
            stage.objective(&batch).unwrap().total,
            permuted.objective(&batch).unwrap().total,
            epsilon = 1e-12
        );
        assert!(stage.permute_codes(&[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(SvqStage::new(2, 1, 2, vec![0.0; 3], vec![0.0; 2], vec![0.0; 4]).is_err());
        assert!(SvqStage::new(0, 1, 2, vec![], vec![], vec![]).is_err());
        assert!(SvqStage::new(1, 0, 1, vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(SvqStage::new(1, 1, 1, vec![f64::NAN], vec![0.0], vec![0.0]).is_err());
    }
}
