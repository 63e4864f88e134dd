use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use spikelab::nets::{
    interval_sequence, lift, lift_to_sphere, net_ball, net_interval, rho, rho_coords, RhoMetricPoint,
};

fn unit<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn rho_examples() {
    let x = RhoMetricPoint::new(vec![0.3, -0.4]).unwrap();
    assert_eq!(rho(&x, &x).unwrap(), 0.0);
    let d = rho_coords(&[0.0], &[1.0]).unwrap();
    assert!((d - 2f64.sqrt()).abs() < 1e-15);
    assert!(rho_coords(&[0.0], &[0.0, 1.0]).is_err());
    assert!(RhoMetricPoint::new(vec![1.0, 1.0]).is_err());
}

#[test]
fn interval_net_examples() {
    let net = net_interval(1.0 / 3.0).unwrap();
    assert!(net.len() <= 6);
    assert!((net.points[0].coords[0] - (1.0 - 1.0 / 18.0)).abs() < 1e-15);
    assert_eq!(net.points.last().unwrap().coords, vec![0.0]);
    assert!(net_interval(0.4).is_err());
    assert!(net_interval(0.0).is_err());
    for eps in [1.0 / 3.0, 0.1, 0.01] {
        for (k, &x) in interval_sequence(eps).unwrap().iter().enumerate() {
            let i = (k + 1) as f64;
            assert!(x >= i * i / 3.0 + i / 6.0 - 1e-12);
        }
    }
}

#[test]
fn ball_net_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let net = net_ball(2, 1.0 / 3.0, &mut rng).unwrap();
    assert!(net.len() as f64 <= 624.0);
    assert!(net.points.iter().any(|p| p.coords.iter().all(|&v| v == 0.0)));
    assert!(net.build_coverage.unwrap() <= 1.0 / 3.0);
    assert!(net_ball(1, 0.3, &mut rng).is_err());
    let json: serde_json::Value = serde_json::from_str(&net.to_json()).unwrap();
    assert_eq!(json["size"].as_u64().unwrap() as usize, net.len());
    assert_eq!(json["m"], 2);
}

#[test]
fn lift_to_sphere_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = net_ball(3, 1.0 / 3.0, &mut rng).unwrap();
    let index = net.index();

    let u = net.points.iter().find(|p| p.coords.iter().any(|&v| v != 0.0)).unwrap();
    let h = (1.0 - u.coords.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let w = unit(5, &mut rng);
    let mut x = u.coords.clone();
    x.extend(w.iter().map(|v| h * v));
    let (y, v) = index.lift_to_sphere(&x).unwrap();
    assert_eq!(v.coords, u.coords);
    assert!(dist(&x, &y) < 1e-12);

    let mut flat = unit(3, &mut rng);
    flat.extend([0.0; 4]);
    let (y, v) = index.lift_to_sphere(&flat).unwrap();
    assert_eq!(&y[..3], v.coords.as_slice());
    assert!(y[3..].iter().all(|&t| t == 0.0));

    for _ in 0..10_000 {
        let x = unit(20, &mut rng);
        let (y, v) = index.lift_to_sphere(&x).unwrap();
        assert!(dist(&x, &y) <= 1.0 / 3.0 + 1e-12);
        assert!((dist(&x, &y) - rho_coords(&x[..3], &v.coords).unwrap()).abs() < 1e-12);
    }
    assert!(lift_to_sphere(&[1.0, 0.0], &net).is_err());
}

#[test]
fn interval_lift_reflects_sign() {
    let net = net_interval(1.0 / 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let x = unit(6, &mut rng);
        let (y, _) = lift_to_sphere(&x, &net).unwrap();
        assert!(dist(&x, &y) <= 1.0 / 3.0 + 1e-12);
    }
}

fn ball_point() -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(-1.0f64..1.0, 3), 0.0f64..1.0).prop_map(|(v, r)| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        v.into_iter().map(|x| x / norm * r).collect()
    })
}

proptest! {
    #[test]
    fn rho_is_a_metric(x in ball_point(), y in ball_point(), z in ball_point()) {
        let dxy = rho_coords(&x, &y).unwrap();
        prop_assert_eq!(dxy, rho_coords(&y, &x).unwrap());
        prop_assert!(rho_coords(&x, &x).unwrap() == 0.0);
        prop_assert!(dxy <= rho_coords(&x, &z).unwrap() + rho_coords(&z, &y).unwrap() + 1e-12);
        prop_assert!((dxy - dist(&lift(&x), &lift(&y))).abs() < 1e-12);
    }
}
