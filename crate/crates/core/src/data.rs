//! Synthetic manifold datasets and their latent ground truth.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvqError};

/// Leaf phases of a hierarchical phase tree and their `(cos, sin)` embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSample {
    pub phases: Vec<f64>,
    pub embedded: Vec<f64>,
}

impl PhaseSample {
    /// Wraps each phase into `[0, 2pi)` and embeds it.
    pub fn from_phases(phases: &[f64]) -> Self {
        let phases: Vec<f64> = phases.iter().map(|&p| wrap_angle(p)).collect();
        let embedded = embed_phases(&phases);
        PhaseSample { phases, embedded }
    }

    pub fn to_manifold(&self) -> ManifoldSample {
        ManifoldSample {
            latent: self.phases.clone(),
            data: self.embedded.clone(),
        }
    }
}

/// A point `x(u)` on a manifold with its coordinate `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSample {
    pub latent: Vec<f64>,
    pub data: Vec<f64>,
}

/// Which generator produced a dataset, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Circle,
    HierPhases {
        #[serde(default = "default_depth")]
        depth: usize,
    },
    Object {
        sigma: f64,
        grid_min: i64,
        grid_max: i64,
        pos_min: f64,
        pos_max: f64,
    },
    Blobs {
        centers: Vec<[f64; 2]>,
        std_dev: f64,
    },
}

fn default_depth() -> usize {
    2
}

impl GeneratorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Circle => "circle",
            GeneratorSpec::HierPhases { .. } => "hier-phases",
            GeneratorSpec::Object { .. } => "object",
            GeneratorSpec::Blobs { .. } => "blobs",
        }
    }

    /// `(latent_dim, data_dim)` of the records this generator emits.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            GeneratorSpec::Circle => (1, 2),
            GeneratorSpec::HierPhases { depth } => (1 << depth, 2 << depth),
            GeneratorSpec::Object {
                grid_min, grid_max, ..
            } => (1, (grid_max - grid_min + 1).max(0) as usize),
            GeneratorSpec::Blobs { .. } => (1, 2),
        }
    }
}

/// A generated dataset together with the provenance needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: GeneratorSpec,
    pub seed: u64,
    pub samples: Vec<ManifoldSample>,
}

impl Dataset {
    pub fn generate(spec: &GeneratorSpec, seed: u64, count: usize) -> Result<Self> {
        let samples = match spec {
            GeneratorSpec::Circle => gen_circle(seed, count)?,
            GeneratorSpec::HierPhases { depth } => {
                gen_hierarchical_phases_depth(seed, count, *depth)?
                    .iter()
                    .map(PhaseSample::to_manifold)
                    .collect()
            }
            GeneratorSpec::Object {
                sigma,
                grid_min,
                grid_max,
                pos_min,
                pos_max,
            } => {
                if count == 0 {
                    return Err(SvqError::EmptyDataset);
                }
                let positions: Vec<f64> = (0..count)
                    .map(|i| {
                        if count == 1 {
                            *pos_min
                        } else {
                            pos_min + (pos_max - pos_min) * i as f64 / (count - 1) as f64
                        }
                    })
                    .collect();
                let grid: Vec<i64> = (*grid_min..=*grid_max).collect();
                gen_object_manifold(*sigma, &positions, &grid)?
            }
            GeneratorSpec::Blobs { centers, std_dev } => gen_blobs(seed, count, centers, *std_dev)?,
        };
        Ok(Dataset {
            spec: spec.clone(),
            seed,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn data(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.data.clone()).collect()
    }

    /// Phase samples, for datasets whose latent coordinates are phases.
    pub fn phase_samples(&self) -> Option<Vec<PhaseSample>> {
        match self.spec {
            GeneratorSpec::HierPhases { .. } => Some(
                self.samples
                    .iter()
                    .map(|s| PhaseSample {
                        phases: s.latent.clone(),
                        embedded: s.data.clone(),
                    })
                    .collect(),
            ),
            _ => None,
        }
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `(cos p1, sin p1, cos p2, sin p2, ...)`.
pub fn embed_phases(phases: &[f64]) -> Vec<f64> {
    phases.iter().flat_map(|p| [p.cos(), p.sin()]).collect()
}

/// Builds the leaves of a binary phase tree. `split` supplies the
/// `(alpha, beta)` pair for each internal node in depth-first order.
pub fn phase_tree_leaves(
    root: f64,
    depth: usize,
    split: &mut impl FnMut() -> (f64, f64),
) -> Vec<f64> {
    let mut level = vec![root];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for phi in level {
            let (alpha, beta) = split();
            next.push(phi - alpha);
            next.push(phi + beta);
        }
        level = next;
    }
    level
}

/// Hierarchically correlated phases with the default tree depth of 2.
pub fn gen_hierarchical_phases(seed: u64, count: usize) -> Result<Vec<PhaseSample>> {
    gen_hierarchical_phases_depth(seed, count, 2)
}

/// Each sample draws a uniform root phase in `[0, 2pi)` and splits every
/// node as `phi -> (phi - alpha, phi + beta)` with fresh
/// `alpha, beta ~ U[0, pi/2]`.
pub fn gen_hierarchical_phases_depth(
    seed: u64,
    count: usize,
    depth: usize,
) -> Result<Vec<PhaseSample>> {
    if count == 0 {
        return Err(SvqError::EmptyDataset);
    }
    if depth == 0 || depth > 8 {
        return Err(SvqError::invalid("depth", "must be in 1..=8"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let root = rng.gen_range(0.0..TAU);
            let mut split = || (rng.gen_range(0.0..=PI / 2.0), rng.gen_range(0.0..=PI / 2.0));
            let leaves = phase_tree_leaves(root, depth, &mut split);
            PhaseSample::from_phases(&leaves)
        })
        .collect())
}

/// Points `(cos t, sin t)` with `t ~ U[0, 2pi)`.
pub fn gen_circle(seed: u64, count: usize) -> Result<Vec<ManifoldSample>> {
    if count == 0 {
        return Err(SvqError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| circle_point(rng.gen_range(0.0..TAU)))
        .collect())
}

pub fn circle_point(theta: f64) -> ManifoldSample {
    ManifoldSample {
        latent: vec![theta],
        data: vec![theta.cos(), theta.sin()],
    }
}

/// Sampled Gaussian bump `x_i = exp(-(i - a)^2 / (2 sigma^2))` for each
/// object position `a`.
pub fn gen_object_manifold(
    sigma: f64,
    positions: &[f64],
    grid: &[i64],
) -> Result<Vec<ManifoldSample>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SvqError::invalid("sigma", "object width must be positive"));
    }
    if grid.is_empty() {
        return Err(SvqError::invalid("grid", "must contain at least one location"));
    }
    if positions.is_empty() {
        return Err(SvqError::EmptyDataset);
    }
    let denom = 2.0 * sigma * sigma;
    Ok(positions
        .iter()
        .map(|&a| ManifoldSample {
            latent: vec![a],
            data: grid
                .iter()
                .map(|&i| {
                    let d = i as f64 - a;
                    (-(d * d) / denom).exp()
                })
                .collect(),
        })
        .collect())
}

/// Isotropic 2-D Gaussian blobs; the latent coordinate is the blob index.
pub fn gen_blobs(
    seed: u64,
    count: usize,
    centers: &[[f64; 2]],
    std_dev: f64,
) -> Result<Vec<ManifoldSample>> {
    if count == 0 {
        return Err(SvqError::EmptyDataset);
    }
    if centers.is_empty() {
        return Err(SvqError::invalid("centers", "need at least one blob"));
    }
    if !(std_dev >= 0.0 && std_dev.is_finite()) {
        return Err(SvqError::invalid("std_dev", "must be finite and non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|i| {
            let k = i % centers.len();
            let (g0, g1) = gaussian_pair(&mut rng);
            ManifoldSample {
                latent: vec![k as f64],
                data: vec![centers[k][0] + std_dev * g0, centers[k][1] + std_dev * g1],
            }
        })
        .collect())
}

// Box-Muller
fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    (r * (TAU * u2).cos(), r * (TAU * u2).sin())
}

/// Circular 2-D histogram over `[0, 2pi)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    pub bins: usize,
    /// Row-major, `counts[i * bins + j]` for `phi_i` bin `i`, `phi_j` bin `j`.
    pub counts: Vec<u64>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Histogram2D {
    pub fn empty(bins: usize) -> Self {
        Histogram2D {
            bins,
            counts: vec![0; bins * bins],
            x_range: (0.0, TAU),
            y_range: (0.0, TAU),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.bins + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let b = self.bins;
        let mut counts = vec![0; b * b];
        for i in 0..b {
            for j in 0..b {
                counts[j * b + i] = self.counts[i * b + j];
            }
        }
        Histogram2D {
            bins: b,
            counts,
            x_range: self.y_range,
            y_range: self.x_range,
        }
    }
}

/// Bin index of an angle on a circle cut into `bins` equal arcs.
pub fn angle_bin(angle: f64, bins: usize) -> usize {
    ((wrap_angle(angle) / TAU * bins as f64).floor() as usize) % bins
}

/// Co-occurrence histogram of phases `i` and `j` (1-based).
pub fn cooccurrence(samples: &[PhaseSample], i: usize, j: usize, bins: usize) -> Result<Histogram2D> {
    if samples.is_empty() {
        return Err(SvqError::EmptyDataset);
    }
    if bins < 2 {
        return Err(SvqError::invalid("bins", "need at least 2 bins"));
    }
    let phases = samples[0].phases.len();
    if i == 0 || j == 0 || i > phases || j > phases {
        return Err(SvqError::invalid(
            "phase index",
            format!("must be in 1..={phases}, got ({i}, {j})"),
        ));
    }
    let mut hist = Histogram2D::empty(bins);
    for s in samples {
        let bi = angle_bin(s.phases[i - 1], bins);
        let bj = angle_bin(s.phases[j - 1], bins);
        hist.counts[bi * bins + bj] += 1;
    }
    Ok(hist)
}

/// Mean resultant length of a set of angles, in `[0, 1]`.
pub fn mean_resultant_length(angles: impl IntoIterator<Item = f64>) -> f64 {
    let (mut c, mut s, mut k) = (0.0, 0.0, 0usize);
    for a in angles {
        c += a.cos();
        s += a.sin();
        k += 1;
    }
    if k == 0 {
        return 0.0;
    }
    (c * c + s * s).sqrt() / k as f64
}

/// Concentration of the circular difference `phi_i - phi_j` (1-based).
pub fn difference_concentration(samples: &[PhaseSample], i: usize, j: usize) -> f64 {
    mean_resultant_length(samples.iter().map(|s| s.phases[i - 1] - s.phases[j - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighTest {
    pub mean_resultant: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Rayleigh test of circular uniformity, with the standard small-sample
/// correction to the p-value.
pub fn rayleigh_test(angles: &[f64]) -> RayleighTest {
    let n = angles.len() as f64;
    let r = mean_resultant_length(angles.iter().copied());
    let z = n * r * r;
    let p = (-z).exp() * (1.0 + (2.0 * z - z * z) / (4.0 * n)
        - (24.0 * z - 132.0 * z * z + 76.0 * z.powi(3) - 9.0 * z.powi(4)) / (288.0 * n * n));
    RayleighTest {
        mean_resultant: r,
        z,
        p_value: p.clamp(0.0, 1.0),
    }
}
