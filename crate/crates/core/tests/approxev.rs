use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spikelab::approxev::{
    goe_approx_ev, l1_concentration_bound, probe_block, spm_approx_ev, spm_approx_ev_smallest,
    trace_concentration_probe,
};
use spikelab::ensembles::{sample, EnsembleSpec};
use spikelab::error::Error;
use spikelab::limits::{mp_stieltjes, semicircle_stieltjes};
use spikelab::linalg::{eigenvalues, SymMatrix};
use spikelab::mc::median;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn goe_construction() {
    let spec = EnsembleSpec::deformed_goe(500, 1.0, vec![2.0], 21).unwrap();
    let draw = sample(&spec, 0).unwrap();
    let rep = goe_approx_ev(&draw, 1).unwrap();
    assert!(rep.event_b_ok);
    assert_eq!(rep.lambda0, 2.25);
    assert_eq!((rep.l1_pred, rep.l2_pred), semicircle_stieltjes(2.5, 1.0).unwrap());
    assert!((rep.l1.unwrap() + 0.5).abs() <= 0.1);
    assert!((rep.l2.unwrap() - 1.0 / 3.0).abs() <= 0.1);
    assert!(rep.gap.unwrap().abs() <= 0.15);
    assert!(rep.identity_residual().unwrap() <= 1e-8);
    assert!((norm(rep.x.as_ref().unwrap()) - 1.0).abs() <= 1e-10);
    let top = eigenvalues(&draw.matrix).unwrap()[0];
    assert!(rep.rayleigh.unwrap() <= top + 1e-8);

    let sub = EnsembleSpec::deformed_goe(50, 1.0, vec![0.5], 1).unwrap();
    assert!(matches!(goe_approx_ev(&sample(&sub, 0).unwrap(), 1), Err(Error::Subcritical(_))));
    assert!(goe_approx_ev(&draw, 2).is_err());
}

#[test]
fn spiked_construction() {
    let spec = EnsembleSpec::spiked(1000, 500, vec![4.0], 22).unwrap();
    let draw = sample(&spec, 0).unwrap();
    let rep = spm_approx_ev(&draw, 1).unwrap();
    assert!(rep.event_b_ok);
    let c = rep.c.unwrap();
    assert_eq!((rep.l1_pred, rep.l2_pred), mp_stieltjes(rep.target, c).unwrap());
    assert!((rep.l1.unwrap() + 0.25).abs() <= 0.05);
    assert!((rep.l2.unwrap() - 9.0 / 128.0).abs() <= 0.02);
    assert!(rep.gap.unwrap().abs() <= 0.2);
    assert!(rep.identity_residual().unwrap() <= 1e-8);
    assert!(rep.y_residual.unwrap() <= 1e-8);
    assert!((norm(rep.x.as_ref().unwrap()) - 1.0).abs() <= 1e-10);
    assert!(rep.rayleigh.unwrap() <= eigenvalues(&draw.matrix).unwrap()[0] + 1e-8);
}

#[test]
fn smallest_construction() {
    let spec = EnsembleSpec::spiked(400, 101, vec![0.25], 23).unwrap();
    let draw = sample(&spec, 0).unwrap();
    let rep = spm_approx_ev_smallest(&draw, 1).unwrap();
    assert!(rep.event_b_ok);
    assert!((rep.target - 1.0 / 6.0).abs() < 1e-12);
    assert!(rep.identity_residual().unwrap() <= 1e-8);
    assert!(rep.y_residual.unwrap() <= 1e-8);
    let bottom = *eigenvalues(&draw.matrix).unwrap().last().unwrap();
    assert!(rep.rayleigh.unwrap() >= bottom - 1e-8);

    let wide = EnsembleSpec::spiked(50, 60, vec![0.25], 1).unwrap();
    assert!(spm_approx_ev_smallest(&sample(&wide, 0).unwrap(), 1).is_err());
}

#[test]
fn resolvent_traces_track_the_semicircle() {
    let traces: Vec<f64> = (0..50)
        .map(|seed| {
            let spec = EnsembleSpec::deformed_goe(500, 1.0, vec![2.0], 300 + seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            trace_concentration_probe(&sample(&spec, 0).unwrap(), 2.5, 1, &mut rng).unwrap().tr_r_over_m
        })
        .collect();
    assert!((median(&traces) + 0.5).abs() <= 0.05);
}

#[test]
fn probe_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = EnsembleSpec::deformed_goe(201, 1.0, vec![2.0], 24).unwrap();
    let draw = sample(&spec, 0).unwrap();
    let probe = trace_concentration_probe(&draw, 2.5, 1000, &mut rng).unwrap();
    assert_eq!(probe.m, 200);
    assert!((probe.mean_l1 - probe.tr_r_over_m).abs() <= 3.0 * probe.std_l1 / 1000f64.sqrt());
    let d = 2.5 - 2.25;
    let (lower, upper) = l1_concentration_bound(200, d, 0.2);
    assert!(probe.l1_exceedance(0.2) <= lower + upper);

    let zero = SymMatrix::zeros(50);
    let p = probe_block(&zero, -1.0, 500, &mut rng).unwrap();
    assert_eq!(p.tr_r_over_m, 1.0);
    for (l1, l2) in p.l1_samples.iter().zip(&p.l2_samples) {
        assert!((l1 - l2).abs() < 1e-12);
    }
    assert!((p.mean_l1 - 1.0).abs() < 4.0 * (2.0 / 50.0f64).sqrt() / 500f64.sqrt());

    let spiked = EnsembleSpec::spiked(200, 100, vec![4.0], 25).unwrap();
    let sp = trace_concentration_probe(&sample(&spiked, 0).unwrap(), 4.6, 200, &mut rng).unwrap();
    assert_eq!(sp.m, 200);
    assert!((sp.mean_l1 - sp.tr_r_over_m).abs() <= 4.0 * sp.std_l1 / 200f64.sqrt());
}
