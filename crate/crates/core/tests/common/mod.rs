//! Oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svq::oracle::{enumerate_histogram_distortion, mc_distortion_oracle};
use svq::{ChainNetwork, ChainSpec, GradientFlow, SvqStage};

const H: f64 = 1e-5;

pub fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let na = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-8)
}

pub fn random_batch(rng: &mut ChaCha8Rng, dim: usize, len: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..len)
        .map(|_| (0..dim).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect()
}

#[derive(Clone, Copy)]
pub enum Family {
    Weights,
    Biases,
    Recon,
}

pub const FAMILIES: [Family; 3] = [Family::Weights, Family::Biases, Family::Recon];

fn param(stage: &mut SvqStage, fam: Family) -> &mut [f64] {
    match fam {
        Family::Weights => stage.weights_mut(),
        Family::Biases => stage.biases_mut(),
        Family::Recon => stage.recon_mut(),
    }
}

fn analytic(g: &svq::StageGradients, fam: Family) -> &[f64] {
    match fam {
        Family::Weights => &g.weights,
        Family::Biases => &g.biases,
        Family::Recon => &g.recon,
    }
}

/// Central differences of `f` over every component of one parameter family
/// of stage `l`.
fn finite_differences<F>(chain: &ChainNetwork, l: usize, fam: Family, f: F) -> Vec<f64>
where
    F: Fn(&ChainNetwork) -> f64,
{
    let len = param(&mut chain.stages()[l].clone(), fam).len();
    (0..len)
        .map(|i| {
            let eval = |delta: f64| {
                let mut c = chain.clone();
                param(&mut c.stages_mut()[l], fam)[i] += delta;
                f(&c)
            };
            (eval(H) - eval(-H)) / (2.0 * H)
        })
        .collect()
}

/// Worst relative error of single-stage gradients over `configs` random
/// stages and batches.
pub fn single_stage_worst(seed: u64, configs: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let m = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=25);
        let d = rng.gen_range(1..=5);
        let range = rng.gen_range(0.1..2.0);
        let stage = SvqStage::random(m, n, d, range, &mut rng).unwrap();
        let len = rng.gen_range(1..=6);
        let batch = random_batch(&mut rng, d, len, 1.5);
        let g = stage.gradients(&batch).unwrap();
        let chain = ChainNetwork::new(vec![stage], vec![1.0]).unwrap();
        for fam in FAMILIES {
            let fd = finite_differences(&chain, 0, fam, |c| {
                c.stages()[0].objective(&batch).unwrap().total
            });
            worst = worst.max(rel_err(analytic(&g, fam), &fd));
        }
    }
    worst
}

/// Worst relative error of full-flow gradients of the weighted total of
/// random two-stage chains, over both stages.
pub fn chained_worst(seed: u64, configs: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let spec = ChainSpec {
            layers: vec![rng.gen_range(1..=4), rng.gen_range(1..=5), rng.gen_range(1..=4)],
            samples: vec![rng.gen_range(1..=20), rng.gen_range(1..=20)],
            lambdas: vec![rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)],
        };
        let range = rng.gen_range(0.1..2.0);
        let chain = ChainNetwork::random(&spec, range, &mut rng).unwrap();
        let len = rng.gen_range(1..=5);
        let batch = random_batch(&mut rng, spec.layers[0], len, 1.5);
        let g = chain.gradients(&batch, GradientFlow::Full).unwrap();
        for l in 0..2 {
            for fam in FAMILIES {
                let fd = finite_differences(&chain, l, fam, |c| {
                    c.objective(&batch).unwrap().weighted_total
                });
                worst = worst.max(rel_err(analytic(&g.stages[l], fam), &fd));
            }
        }
    }
    worst
}

/// Largest gap between exhaustive enumeration and the closed form over
/// every `m, n <= 3`.
pub fn enumeration_worst(seed: u64, per_shape: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for m in 1..=3 {
        for n in 1..=3 {
            for _ in 0..per_shape {
                let d = rng.gen_range(1..=4);
                let stage = SvqStage::random(m, n, d, 2.0, &mut rng).unwrap();
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let exact = enumerate_histogram_distortion(&stage, &x).unwrap();
                let closed = stage.objective(&[x]).unwrap().total;
                worst = worst.max((exact - closed).abs());
            }
        }
    }
    worst
}

/// How many of `cases` random larger stages have a 10^5-trial Monte Carlo
/// estimate within three standard errors of the closed form.
pub fn monte_carlo_inside(seed: u64, cases: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0;
    for case in 0..cases {
        let m = rng.gen_range(4..=8);
        let n = rng.gen_range(4..=20);
        let d = rng.gen_range(2..=5);
        let stage = SvqStage::random(m, n, d, 1.5, &mut rng).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let closed = stage.objective(&[x.clone()]).unwrap().total;
        let mc = mc_distortion_oracle(&stage, &x, 100_000, seed * 1000 + case).unwrap();
        if (mc.mean - closed).abs() <= 3.0 * mc.std_error {
            inside += 1;
        }
    }
    inside
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Mean squared distance of each point to its nearest centre.
pub fn quantisation_error(data: &[Vec<f64>], centres: &[Vec<f64>]) -> f64 {
    data.iter()
        .map(|x| {
            centres
                .iter()
                .map(|c| sq_dist(x, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum::<f64>()
        / data.len() as f64
}

/// Lloyd's algorithm from `restarts` random starts; returns the best centres
/// and their mean squared error.
pub fn kmeans(data: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> (Vec<Vec<f64>>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (Vec::new(), f64::INFINITY);
    for _ in 0..restarts {
        let mut centres: Vec<Vec<f64>> = rand::seq::index::sample(&mut rng, data.len(), k)
            .iter()
            .map(|i| data[i].clone())
            .collect();
        for _ in 0..200 {
            let d = data[0].len();
            let mut sums = vec![vec![0.0; d]; k];
            let mut counts = vec![0usize; k];
            for x in data {
                let j = (0..k)
                    .min_by(|&a, &b| sq_dist(x, &centres[a]).total_cmp(&sq_dist(x, &centres[b])))
                    .unwrap();
                counts[j] += 1;
                for (s, v) in sums[j].iter_mut().zip(x) {
                    *s += v;
                }
            }
            let next: Vec<Vec<f64>> = (0..k)
                .map(|j| {
                    if counts[j] == 0 {
                        centres[j].clone()
                    } else {
                        sums[j].iter().map(|s| s / counts[j] as f64).collect()
                    }
                })
                .collect();
            let done = next == centres;
            centres = next;
            if done {
                break;
            }
        }
        let err = quantisation_error(data, &centres);
        if err < best.1 {
            best = (centres, err);
        }
    }
    best
}
