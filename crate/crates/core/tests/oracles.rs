//! The closed-form stage objective against sampling and enumeration.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svq::oracle::enumerate_histogram_distortion;
use svq::SvqStage;

#[test]
fn enumeration_matches_closed_form_for_small_stages() {
    let worst = common::enumeration_worst(3, 20);
    assert!(worst <= 1e-10, "largest gap {worst:e}");
}

#[test]
fn enumeration_matches_at_moderate_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let stage = SvqStage::random(5, 8, 3, 1.0, &mut rng).unwrap();
    let x = vec![0.2, -0.7, 1.1];
    let exact = enumerate_histogram_distortion(&stage, &x).unwrap();
    let closed = stage.objective(&[x]).unwrap().total;
    assert!((exact - closed).abs() <= 1e-10 * closed.max(1.0));
}

#[test]
fn monte_carlo_within_three_standard_errors() {
    let inside = common::monte_carlo_inside(8, 100);
    assert!(inside >= 95, "only {inside}/100 within 3 SE");
}

#[test]
fn kmeans_oracle_recovers_separated_blobs() {
    let centres = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]];
    let data = svq::data::gen_blobs(1, 600, &centres, 0.3).unwrap();
    let xs: Vec<Vec<f64>> = data.into_iter().map(|s| s.data).collect();
    let (found, err) = common::kmeans(&xs, 3, 5, 2);
    assert!(err < 2.0 * 0.3 * 0.3 * 1.2);
    for c in centres {
        assert!(found.iter().any(|f| (f[0] - c[0]).hypot(f[1] - c[1]) < 0.1));
    }
}
