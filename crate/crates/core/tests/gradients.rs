//! Analytic gradients against central finite differences.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svq::{ChainNetwork, ChainSpec, GradientFlow};

#[test]
fn single_stage_gradients_match_finite_differences() {
    let worst = common::single_stage_worst(11, 120);
    assert!(worst < 1e-5, "worst single-stage relative error {worst:e}");
}

#[test]
fn chained_gradients_match_finite_differences() {
    let worst = common::chained_worst(23, 100);
    assert!(worst < 1e-4, "worst cross-stage relative error {worst:e}");
}

#[test]
fn recon_gradient_with_frozen_posterior() {
    // With zero weights and biases the posterior is uniform and constant,
    // so the recon gradient has a closed form.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (m, n, d) = (3, 4, 2);
    let mut stage = svq::SvqStage::random(m, n, d, 1.0, &mut rng).unwrap();
    stage.weights_mut().fill(0.0);
    stage.biases_mut().fill(0.0);
    let batch = common::random_batch(&mut rng, d, 5, 1.0);
    let g = stage.gradients(&batch).unwrap();
    let p = 1.0 / m as f64;
    let (c1, c2) = svq::svq::term_weights(n);
    for y in 0..m {
        for k in 0..d {
            let r = stage.recon_row(y)[k];
            let mut expect = 0.0;
            for x in &batch {
                let xhat: f64 = (0..m).map(|z| p * stage.recon_row(z)[k]).sum();
                expect += c1 * 2.0 * p * (r - x[k]) + c2 * 2.0 * p * (xhat - x[k]);
            }
            expect /= batch.len() as f64;
            assert!((g.recon[y * d + k] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn per_stage_flow_is_own_objective_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = ChainSpec {
        layers: vec![3, 4, 3],
        samples: vec![5, 7],
        lambdas: vec![1.5, 2.0],
    };
    let chain = ChainNetwork::random(&spec, 1.0, &mut rng).unwrap();
    let batch = common::random_batch(&mut rng, 3, 4, 1.0);
    let g = chain.gradients(&batch, GradientFlow::PerStage).unwrap();
    let own = chain.stages()[0].gradients(&batch).unwrap();
    for (a, b) in g.stages[0].weights.iter().zip(&own.weights) {
        assert!((a - 1.5 * b).abs() < 1e-12);
    }
}

#[test]
fn chain_gradient_reduction_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = ChainSpec {
        layers: vec![4, 6, 3],
        samples: vec![10, 10],
        lambdas: vec![1.0, 1.0],
    };
    let chain = ChainNetwork::random(&spec, 0.5, &mut rng).unwrap();
    let batch = common::random_batch(&mut rng, 4, 1000, 1.0);
    let a = chain.gradients(&batch, GradientFlow::Full).unwrap();
    let b = chain.gradients(&batch, GradientFlow::Full).unwrap();
    assert_eq!(a.stages, b.stages);
}
