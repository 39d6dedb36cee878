//! Activity maps over pairs of phases and invariant/factorial labelling.

use std::f64::consts::TAU;

use crate::chain::ChainNetwork;
use crate::data::{embed_phases, PhaseSample};
use crate::error::{Result, SvqError};

pub const MIN_GRID: usize = 8;

/// Posterior of every node in one layer over a `grid x grid` lattice of
/// two phases, all other phases held fixed.
///
/// Cell `(i, j)` has `phi_a = 2 pi i / grid` and `phi_b = 2 pi j / grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityMap {
    pub layer: usize,
    /// 1-based phase indices `(a, b)`.
    pub axes: (usize, usize),
    pub fixed: Vec<f64>,
    pub grid: usize,
    pub m: usize,
    /// Indexed `(i * grid + j) * m + node`.
    pub values: Vec<f64>,
}

impl ActivityMap {
    pub fn get(&self, i: usize, j: usize, node: usize) -> f64 {
        self.values[(i * self.grid + j) * self.m + node]
    }

    pub fn node_grid(&self, node: usize) -> Vec<f64> {
        (0..self.grid * self.grid)
            .map(|c| self.values[c * self.m + node])
            .collect()
    }
}

fn grid_angle(i: usize, grid: usize) -> f64 {
    TAU * i as f64 / grid as f64
}

pub fn activity_map(
    chain: &ChainNetwork,
    layer: usize,
    axes: (usize, usize),
    fixed: &[f64],
    grid: usize,
) -> Result<ActivityMap> {
    if grid < MIN_GRID {
        return Err(SvqError::invalid("grid", format!("must be at least {MIN_GRID}")));
    }
    let phases = fixed.len();
    if 2 * phases != chain.input_dim() {
        return Err(SvqError::dims("phases x2", chain.input_dim(), 2 * phases));
    }
    let (a, b) = axes;
    if a == 0 || b == 0 || a > phases || b > phases || a == b {
        return Err(SvqError::invalid(
            "axes",
            format!("need two distinct phases in 1..={phases}, got ({a}, {b})"),
        ));
    }
    if layer == 0 || layer > chain.num_stages() {
        return Err(SvqError::invalid(
            "layer",
            format!("must be in 1..={}", chain.num_stages()),
        ));
    }
    let m = chain.layer_sizes()[layer];
    let mut values = Vec::with_capacity(grid * grid * m);
    let mut phi = fixed.to_vec();
    for i in 0..grid {
        for j in 0..grid {
            phi[a - 1] = grid_angle(i, grid);
            phi[b - 1] = grid_angle(j, grid);
            values.extend(chain.layer_output(&embed_phases(&phi), layer)?);
        }
    }
    Ok(ActivityMap {
        layer,
        axes,
        fixed: fixed.to_vec(),
        grid,
        m,
        values,
    })
}

/// Grid cells that the data actually visits: cells whose sample count is at
/// least `min_fraction` of the busiest cell. Bins are centred on grid points.
pub fn populated_band(
    samples: &[PhaseSample],
    axes: (usize, usize),
    grid: usize,
    min_fraction: f64,
) -> Result<Vec<bool>> {
    if samples.is_empty() {
        return Err(SvqError::EmptyDataset);
    }
    let (a, b) = axes;
    let phases = samples[0].phases.len();
    if a == 0 || b == 0 || a > phases || b > phases {
        return Err(SvqError::invalid("axes", format!("phase indices must be in 1..={phases}")));
    }
    let bin = |p: f64| ((p / TAU * grid as f64).round() as usize) % grid;
    let mut counts = vec![0u64; grid * grid];
    for s in samples {
        counts[bin(s.phases[a - 1]) * grid + bin(s.phases[b - 1])] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(0) as f64;
    Ok(counts
        .iter()
        .map(|&c| c > 0 && c as f64 >= min_fraction * max)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderLabel {
    /// Peak activity below `2/m`, or no real variation over the band.
    Silent,
    /// Depends on `phi_a` only (1-based phase index).
    Factorial(usize),
    /// Depends on `phi_a + phi_b` only.
    Invariant,
    /// Responds but none of the ratios is below threshold.
    Mixed,
}

impl std::fmt::Display for EncoderLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EncoderLabel::Silent => write!(f, "silent"),
            EncoderLabel::Factorial(a) => write!(f, "factorial-{a}"),
            EncoderLabel::Invariant => write!(f, "invariant"),
            EncoderLabel::Mixed => write!(f, "mixed"),
        }
    }
}

impl std::str::FromStr for EncoderLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "silent" => Ok(EncoderLabel::Silent),
            "invariant" => Ok(EncoderLabel::Invariant),
            "mixed" => Ok(EncoderLabel::Mixed),
            _ => s
                .strip_prefix("factorial-")
                .and_then(|a| a.parse().ok())
                .map(EncoderLabel::Factorial)
                .ok_or_else(|| format!("unknown encoder label `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeClassification {
    pub node: usize,
    pub label: EncoderLabel,
    /// `1 - min(ratio, 1)` for the winning ratio; 0 for silent nodes.
    pub score: f64,
    pub peak: f64,
    /// across/along variance ratio for the invariant hypothesis.
    pub invariant_ratio: f64,
    /// `Var(phi_b | phi_a) / Var(phi_a | phi_b)`.
    pub factorial_a_ratio: f64,
    pub factorial_b_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyParams {
    pub ratio_threshold: f64,
    /// Nodes whose max-min range over the band is below this fraction of
    /// their peak count as silent.
    pub min_relative_range: f64,
    pub band_min_fraction: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            ratio_threshold: 0.2,
            min_relative_range: 0.5,
            band_min_fraction: 0.05,
        }
    }
}

/// Pooled within-line variance, lines given by `key(i, j) < keys`.
fn pooled_variance(
    vals: &[f64],
    band: &[bool],
    grid: usize,
    keys: usize,
    key: impl Fn(usize, usize) -> usize,
) -> f64 {
    let mut sum = vec![0.0; keys];
    let mut sum_sq = vec![0.0; keys];
    let mut count = vec![0usize; keys];
    for i in 0..grid {
        for j in 0..grid {
            let c = i * grid + j;
            if band[c] {
                let k = key(i, j);
                sum[k] += vals[c];
                sum_sq[k] += vals[c] * vals[c];
                count[k] += 1;
            }
        }
    }
    let mut within = 0.0;
    let mut total = 0usize;
    for k in 0..keys {
        if count[k] > 0 {
            let n = count[k] as f64;
            within += (sum_sq[k] - sum[k] * sum[k] / n).max(0.0);
            total += count[k];
        }
    }
    if total == 0 {
        0.0
    } else {
        within / total as f64
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Labels every node of a map, restricted to the populated band.
pub fn classify_encoders(
    map: &ActivityMap,
    band: &[bool],
    params: &ClassifyParams,
) -> Result<Vec<NodeClassification>> {
    let g = map.grid;
    if band.len() != g * g {
        return Err(SvqError::dims("band mask", g * g, band.len()));
    }
    if !band.iter().any(|&b| b) {
        return Err(SvqError::invalid("band", "no populated cells"));
    }
    let mut out = Vec::with_capacity(map.m);
    for node in 0..map.m {
        let vals = map.node_grid(node);
        let in_band = || vals.iter().zip(band).filter(|(_, &b)| b).map(|(v, _)| *v);
        let peak = in_band().fold(f64::NEG_INFINITY, f64::max);
        let low = in_band().fold(f64::INFINITY, f64::min);

        // across-band lines hold the circular midpoint phi_a + d/2 fixed,
        // with d = (phi_b - phi_a) mod 2pi, counted in half grid steps
        let diff = |i: usize, j: usize| (j + g - i) % g;
        let across = pooled_variance(&vals, band, g, 2 * g, |i, j| (2 * i + diff(i, j)) % (2 * g));
        let along = pooled_variance(&vals, band, g, g, diff);
        let b_given_a = pooled_variance(&vals, band, g, g, |i, _| i);
        let a_given_b = pooled_variance(&vals, band, g, g, |_, j| j);
        let invariant_ratio = ratio(across, along);
        let factorial_a_ratio = ratio(b_given_a, a_given_b);
        let factorial_b_ratio = ratio(a_given_b, b_given_a);

        let silent = peak < 2.0 / map.m as f64 || peak - low < params.min_relative_range * peak;
        let (label, score) = if silent {
            (EncoderLabel::Silent, 0.0)
        } else {
            let candidates = [
                (invariant_ratio, EncoderLabel::Invariant),
                (factorial_a_ratio, EncoderLabel::Factorial(map.axes.0)),
                (factorial_b_ratio, EncoderLabel::Factorial(map.axes.1)),
            ];
            let (best, label) = candidates
                .iter()
                .copied()
                .fold((f64::INFINITY, EncoderLabel::Mixed), |acc, c| {
                    if c.0 < acc.0 {
                        c
                    } else {
                        acc
                    }
                });
            let score = 1.0 - best.min(1.0);
            if best < params.ratio_threshold {
                (label, score)
            } else {
                (EncoderLabel::Mixed, score)
            }
        };
        out.push(NodeClassification {
            node,
            label,
            score,
            peak,
            invariant_ratio,
            factorial_a_ratio,
            factorial_b_ratio,
        });
    }
    Ok(out)
}
