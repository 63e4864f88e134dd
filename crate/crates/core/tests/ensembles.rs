use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spikelab::ensembles::{sample, sample_deformed, sample_goe, sample_spiked, EnsembleSpec};
use spikelab::linalg::eigenvalues;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn goe_entry_variances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 100_000;
    let mut single = Vec::with_capacity(draws);
    let mut off = Vec::with_capacity(draws);
    let mut diag = Vec::with_capacity(draws);
    for _ in 0..draws {
        single.push(sample_goe(1, 1.0, &mut rng).unwrap().get(0, 0));
        let a = sample_goe(4, 1.0, &mut rng).unwrap();
        off.push(a.get(0, 1));
        diag.push(a.get(2, 2));
    }
    // Four standard errors of a sample variance are about 4·√2·σ²/√N.
    let se = |v: f64| 4.0 * std::f64::consts::SQRT_2 * v / (draws as f64).sqrt();
    let (m, v) = mean_var(&single);
    assert!(m.abs() < 4.0 * (2.0 / draws as f64).sqrt());
    assert!((v - 2.0).abs() < se(2.0));
    let (_, v) = mean_var(&off);
    assert!((v - 0.25).abs() < 0.01);
    let (_, v) = mean_var(&diag);
    assert!((v - 0.5).abs() < se(0.5));
}

#[test]
fn deformed_mean_and_determinism() {
    let spec = EnsembleSpec::deformed_goe(5, 1.0, vec![2.0], 3).unwrap();
    let a11: Vec<f64> = (0..10_000).map(|k| sample_deformed(&spec, k).unwrap().matrix.get(0, 0)).collect();
    let (m, _) = mean_var(&a11);
    assert!((m - 2.0).abs() < 0.05);

    let a = sample(&spec, 0).unwrap().matrix;
    let b = sample(&spec, 0).unwrap().matrix;
    let c = sample(&spec, 1).unwrap().matrix;
    assert_eq!(a.as_matrix(), b.as_matrix());
    assert_ne!(a.as_matrix(), c.as_matrix());

    let null = EnsembleSpec::deformed_goe(6, 1.0, vec![], 3).unwrap();
    assert!(sample(&null, 0).unwrap().matrix.is_finite());
}

#[test]
fn spiked_moments_and_psd() {
    let null = EnsembleSpec::spiked(200, 5, vec![], 4).unwrap();
    let mut diag = Vec::new();
    for k in 0..200 {
        let s = sample_spiked(&null, k).unwrap().matrix;
        diag.extend((0..5).map(|i| s.get(i, i)));
    }
    assert!((mean_var(&diag).0 - 1.0).abs() < 0.05);

    let spec = EnsembleSpec::spiked(10, 3, vec![4.0], 5).unwrap();
    let s11: Vec<f64> = (0..10_000).map(|k| sample_spiked(&spec, k).unwrap().matrix.get(0, 0)).collect();
    assert!((mean_var(&s11).0 - 4.0).abs() < 0.1);

    let wide = EnsembleSpec::spiked(20, 40, vec![3.0, 0.5], 6).unwrap();
    let eigs = eigenvalues(&sample(&wide, 0).unwrap().matrix).unwrap();
    assert!(eigs.iter().all(|&x| x >= -1e-10));
}

#[test]
fn spec_validation() {
    assert!(EnsembleSpec::deformed_goe(3, 1.0, vec![1.0, 2.0], 0).is_err());
    assert!(EnsembleSpec::deformed_goe(1, 1.0, vec![2.0, 1.0], 0).is_err());
    assert!(EnsembleSpec::deformed_goe(3, 0.0, vec![], 0).is_err());
    assert!(EnsembleSpec::spiked(3, 1, vec![4.0, 0.5], 0).is_err());
    assert!(EnsembleSpec::spiked(0, 3, vec![], 0).is_err());
    assert!(EnsembleSpec::spiked(3, 3, vec![-1.0], 0).is_err());
}

#[test]
fn draws_do_not_depend_on_thread_count() {
    use rayon::prelude::*;
    let spec = EnsembleSpec::spiked(30, 10, vec![4.0], 8).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (0..16u64)
                    .into_par_iter()
                    .map(|k| sample(&spec, k).unwrap().matrix.trace())
                    .collect::<Vec<f64>>()
            })
    };
    assert_eq!(run(1), run(4));
}
