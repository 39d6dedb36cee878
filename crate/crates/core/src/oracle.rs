//! Sampling and enumeration oracles for the stage objective.
//!
//! Both estimate `2 E|x - sum_y (nu_y/n) r(y)|^2` where `nu` is the histogram
//! of `n` independent draws from `Pr(y|x)`. Neither touches the closed-form
//! objective, so they can be used to check it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SvqError};
use crate::svq::SvqStage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

fn histogram_distortion(stage: &SvqStage, x: &[f64], counts: &[usize]) -> f64 {
    let n = stage.n() as f64;
    let mut err = 0.0;
    for (k, &xk) in x.iter().enumerate() {
        let mut decoded = 0.0;
        for (y, &c) in counts.iter().enumerate() {
            if c > 0 {
                decoded += (c as f64 / n) * stage.recon_row(y)[k];
            }
        }
        err += (xk - decoded) * (xk - decoded);
    }
    2.0 * err
}

/// Monte Carlo estimate of the histogram-decoder distortion at one input.
pub fn mc_distortion_oracle(
    stage: &SvqStage,
    x: &[f64],
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(SvqError::invalid("trials", "must be at least 1"));
    }
    let post = stage.posterior(x)?;
    let mut cumulative = Vec::with_capacity(post.len());
    let mut acc = 0.0;
    for p in &post.probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; stage.m()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..stage.n() {
            let u: f64 = rng.gen::<f64>() * acc;
            let y = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(stage.m() - 1);
            counts[y] += 1;
        }
        let v = histogram_distortion(stage, x, &counts);
        sum += v;
        sum_sq += v * v;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error: (var / t).sqrt(),
        trials,
    })
}

/// Exact expectation over every histogram of `n` draws, weighted by its
/// multinomial probability. Cost grows as `C(n+m-1, m-1)`.
pub fn enumerate_histogram_distortion(stage: &SvqStage, x: &[f64]) -> Result<f64> {
    let post = stage.posterior(x)?;
    let n = stage.n();
    let m = stage.m();
    let log_fact: Vec<f64> = (0..=n)
        .scan(0.0, |acc, k| {
            if k > 0 {
                *acc += (k as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    let mut counts = vec![0usize; m];
    let mut total = 0.0;
    visit_compositions(n, 0, &mut counts, &mut |counts| {
        let mut log_p = log_fact[n];
        let mut zero = false;
        for (y, &c) in counts.iter().enumerate() {
            if c > 0 {
                if post.probs[y] == 0.0 {
                    zero = true;
                    break;
                }
                log_p += c as f64 * post.probs[y].ln() - log_fact[c];
            }
        }
        if !zero {
            total += log_p.exp() * histogram_distortion(stage, x, counts);
        }
    });
    Ok(total)
}

fn visit_compositions(
    remaining: usize,
    index: usize,
    counts: &mut [usize],
    f: &mut impl FnMut(&[usize]),
) {
    if index + 1 == counts.len() {
        counts[index] = remaining;
        f(counts);
        counts[index] = 0;
        return;
    }
    for c in 0..=remaining {
        counts[index] = c;
        visit_compositions(remaining - c, index + 1, counts, f);
    }
    counts[index] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_hot_posterior_has_zero_variance() {
        let stage =
            SvqStage::new(2, 5, 1, vec![900.0, -900.0], vec![0.0, 0.0], vec![0.5, -3.0]).unwrap();
        let est = mc_distortion_oracle(&stage, &[1.0], 200, 9).unwrap();
        assert_eq!(est.mean, 2.0 * 0.25);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn composition_count() {
        let mut seen = 0;
        let mut counts = vec![0; 3];
        visit_compositions(3, 0, &mut counts, &mut |c| {
            assert_eq!(c.iter().sum::<usize>(), 3);
            seen += 1;
        });
        assert_eq!(seen, 10);
    }

    #[test]
    fn single_draw_enumeration_is_posterior_weighted_error() {
        let stage = SvqStage::new(
            3,
            1,
            2,
            vec![0.3, -0.2, 0.1, 0.5, -0.4, 0.0],
            vec![0.1, 0.0, -0.2],
            vec![1.0, 0.0, 0.0, 1.0, -1.0, -1.0],
        )
        .unwrap();
        let x = [0.2, 0.7];
        let p = stage.posterior(&x).unwrap();
        let direct: f64 = (0..3)
            .map(|y| {
                let r = stage.recon_row(y);
                2.0 * p.probs[y] * ((x[0] - r[0]).powi(2) + (x[1] - r[1]).powi(2))
            })
            .sum();
        assert_relative_eq!(
            enumerate_histogram_distortion(&stage, &x).unwrap(),
            direct,
            epsilon = 1e-14
        );
    }

    #[test]
    fn zero_trials_rejected() {
        let stage = SvqStage::zeros(2, 2, 1).unwrap();
        assert!(mc_distortion_oracle(&stage, &[0.0], 0, 1).is_err());
    }
}
