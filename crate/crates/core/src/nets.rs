//! ε-nets of `[0, 1]` and of the unit ball `B^m` under the hemispheric
//! metric
//!
//! ```text
//! ρ_m(x, y) = √(|x − y|² + (√(1−|x|²) − √(1−|y|²))²),
//! ```
//!
//! which is the Euclidean distance between the lifts of `x` and `y` to the
//! upper unit hemisphere of `R^{m+1}`.
//!
//! The ball net is the product of a greedy separated subset of the sphere
//! `S^{m−1}` with an interval net of radii. The greedy step is randomized, so
//! every ball net is checked by a randomized coverage oracle before it is
//! returned.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on norms and distances to absorb rounding.
pub const NORM_SLACK: f64 = 1e-12;
/// Samples drawn by the coverage check that runs inside [`net_ball`].
pub const BUILD_CERTIFY_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoMetricPoint {
    pub coords: Vec<f64>,
}

impl RhoMetricPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Dimension("point must have m >= 1 coordinates".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("point has non-finite coordinates".into()));
        }
        if norm(&coords) > 1.0 + NORM_SLACK {
            return Err(Error::Domain(format!(
                "point of norm {} lies outside the unit ball",
                norm(&coords)
            )));
        }
        Ok(Self { coords })
    }

    pub fn m(&self) -> usize {
        self.coords.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    /// A net of radii in `[0, 1]`.
    Interval,
    /// A net of the ball `B^m`, `m ≥ 2`.
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonNet {
    pub kind: NetKind,
    pub m: usize,
    pub epsilon: f64,
    pub certified_size_bound: f64,
    pub points: Vec<RhoMetricPoint>,
    /// Largest sampled distance to the net seen by the build-time check.
    pub build_coverage: Option<f64>,
}

#[derive(Serialize)]
struct NetExport<'a> {
    kind: NetKind,
    m: usize,
    epsilon: f64,
    size: usize,
    bound: f64,
    points: Vec<&'a [f64]>,
}

impl EpsilonNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// JSON export: a header `{m, epsilon, size, bound}` plus the points.
    pub fn to_json(&self) -> String {
        let export = NetExport {
            kind: self.kind,
            m: self.m,
            epsilon: self.epsilon,
            size: self.points.len(),
            bound: self.certified_size_bound,
            points: self.points.iter().map(|p| p.coords.as_slice()).collect(),
        };
        serde_json::to_string_pretty(&export).expect("net export is always serializable")
    }

    pub fn index(&self) -> NetIndex<'_> {
        NetIndex::new(self)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn height(x: &[f64]) -> f64 {
    (1.0 - x.iter().map(|v| v * v).sum::<f64>()).max(0.0).sqrt()
}

/// The lift `(x, √(1−|x|²))` onto the upper hemisphere.
pub fn lift(x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    y.push(height(x));
    y
}

/// `ρ_m(x, y)` on raw coordinate slices.
pub fn rho_coords(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "rho needs equal dimensions, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    let dh = height(x) - height(y);
    Ok((d2 + dh * dh).sqrt())
}

pub fn rho(x: &RhoMetricPoint, y: &RhoMetricPoint) -> Result<f64> {
    rho_coords(&x.coords, &y.coords)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0 / 3.0) {
        return Err(Error::Parameter(format!(
            "epsilon must lie in (0, 1/3], got {epsilon}"
        )));
    }
    Ok(())
}

/// The sequence `x_1 = 1/2`, `x_{i+1} = x_i + 2√x_i`, truncated after the
/// first term with `x_i ε² ≥ 1`.
pub fn interval_sequence(epsilon: f64) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let mut xs = vec![0.5];
    loop {
        let x = *xs.last().unwrap();
        if 1.0 - x * epsilon * epsilon <= 0.0 {
            break;
        }
        xs.push(x + 2.0 * x.sqrt());
    }
    Ok(xs)
}

/// Radii `η_i = 1 − x_i ε²` (while positive) followed by `0`.
fn interval_radii(epsilon: f64) -> Result<Vec<f64>> {
    let mut radii: Vec<f64> = interval_sequence(epsilon)?
        .into_iter()
        .map(|x| 1.0 - x * epsilon * epsilon)
        .take_while(|&eta| eta > 0.0)
        .collect();
    radii.push(0.0);
    Ok(radii)
}

pub fn interval_size_bound(epsilon: f64) -> f64 {
    2.0 / epsilon
}

pub fn ball_size_bound(m: usize, epsilon: f64) -> f64 {
    let mf = m as f64;
    4.0 * mf * mf / epsilon * (1.0 + 2.0 * mf / ((mf - 1.0) * epsilon)).powi(m as i32 - 1)
}

/// Volumetric bound on an `s`-separated subset of `S^{m−1}`.
fn sphere_size_bound(m: usize, s: f64) -> f64 {
    2.0 * m as f64 * (1.0 + 2.0 / s).powi(m as i32 - 1)
}

/// An ε-net of `[0, 1]` under `ρ_1`.
pub fn net_interval(epsilon: f64) -> Result<EpsilonNet> {
    let points = interval_radii(epsilon)?
        .into_iter()
        .map(|eta| RhoMetricPoint { coords: vec![eta] })
        .collect();
    Ok(EpsilonNet {
        kind: NetKind::Interval,
        m: 1,
        epsilon,
        certified_size_bound: interval_size_bound(epsilon),
        points,
        build_coverage: None,
    })
}

/// Spatial hash over points of a fixed dimension with a fixed cell width.
struct Grid {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl Grid {
    fn new(dim: usize, cell: f64) -> Self {
        Self {
            cell,
            dim,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    fn insert(&mut self, x: &[f64], id: usize) {
        let key = self.key(x);
        self.buckets.entry(key).or_default().push(id);
    }

    /// Calls `f` on every id stored in the cells adjacent to `x`.
    fn for_neighbors(&self, x: &[f64], mut f: impl FnMut(usize)) {
        let base = self.key(x);
        let mut offset = vec![-1i64; self.dim];
        let mut key = vec![0i64; self.dim];
        loop {
            for d in 0..self.dim {
                key[d] = base[d] + offset[d];
            }
            if let Some(ids) = self.buckets.get(&key) {
                ids.iter().for_each(|&id| f(id));
            }
            let mut d = 0;
            loop {
                if d == self.dim {
                    return;
                }
                offset[d] += 1;
                if offset[d] <= 1 {
                    break;
                }
                offset[d] = -1;
                d += 1;
            }
        }
    }
}

fn random_unit<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let nv = norm(&v);
        if nv > 1e-300 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

/// A maximal `s`-separated subset of `S^{m−1}`, grown greedily from random
/// candidates until `patience` consecutive candidates are rejected.
fn greedy_sphere_net<R: Rng + ?Sized>(
    m: usize,
    s: f64,
    patience: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut grid = Grid::new(m, s);
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    let mut rejected = 0usize;
    while rejected < patience {
        let cand = random_unit(m, rng);
        let mut close = false;
        grid.for_neighbors(&cand, |id| {
            if !close {
                let d2: f64 = chosen[id].iter().zip(&cand).map(|(a, b)| (a - b).powi(2)).sum();
                close = d2 < s * s;
            }
        });
        if close {
            rejected += 1;
        } else {
            grid.insert(&cand, chosen.len());
            chosen.push(cand);
            rejected = 0;
        }
    }
    chosen
}

/// An ε-net of `B^m` under `ρ_m`, `m ≥ 2`: radii from the interval net at
/// `ε/m` times directions from an `(1 − 1/m)ε`-separated sphere subset.
pub fn net_ball<R: Rng + ?Sized>(m: usize, epsilon: f64, rng: &mut R) -> Result<EpsilonNet> {
    check_epsilon(epsilon)?;
    if m < 2 {
        return Err(Error::Parameter(format!(
            "net_ball needs m >= 2 (use net_interval for m = 1), got {m}"
        )));
    }
    let a = 1.0 - 1.0 / m as f64;
    let sep = a * epsilon;
    let patience = (10.0 * sphere_size_bound(m, sep)).ceil() as usize;
    let sphere = greedy_sphere_net(m, sep, patience, rng);
    let radii = interval_radii(epsilon / m as f64)?;
    let mut points = Vec::with_capacity(sphere.len() * (radii.len() - 1) + 1);
    for &eta in radii.iter().filter(|&&eta| eta > 0.0) {
        for dir in &sphere {
            points.push(RhoMetricPoint {
                coords: dir.iter().map(|v| eta * v).collect(),
            });
        }
    }
    points.push(RhoMetricPoint { coords: vec![0.0; m] });
    let mut net = EpsilonNet {
        kind: NetKind::Ball,
        m,
        epsilon,
        certified_size_bound: ball_size_bound(m, epsilon),
        points,
        build_coverage: None,
    };
    if net.len() as f64 > net.certified_size_bound {
        return Err(Error::Certification(format!(
            "net size {} exceeds the bound {}",
            net.len(),
            net.certified_size_bound
        )));
    }
    let report = certify_coverage(&net, BUILD_CERTIFY_SAMPLES, rng)?;
    if !report.passed {
        return Err(Error::Certification(format!(
            "sampled point at distance {} > epsilon = {epsilon}",
            report.max_distance
        )));
    }
    net.build_coverage = Some(report.max_distance);
    Ok(net)
}

/// Nearest-point queries against a built net, in the lifted coordinates.
pub struct NetIndex<'a> {
    net: &'a EpsilonNet,
    grid: Grid,
    lifted: Vec<Vec<f64>>,
}

impl<'a> NetIndex<'a> {
    pub fn new(net: &'a EpsilonNet) -> Self {
        let mut grid = Grid::new(net.m + 1, net.epsilon);
        let lifted: Vec<Vec<f64>> = net.points.iter().map(|p| lift(&p.coords)).collect();
        for (id, y) in lifted.iter().enumerate() {
            grid.insert(y, id);
        }
        Self { net, grid, lifted }
    }

    /// The closest net point within `ε` of `x`, as `(index, ρ distance)`.
    /// `None` means no net point lies within `ε`.
    pub fn nearest_within(&self, x: &[f64]) -> Option<(usize, f64)> {
        let y = lift(x);
        let mut best: Option<(usize, f64)> = None;
        self.grid.for_neighbors(&y, |id| {
            let d2: f64 = self.lifted[id].iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
            if best.map_or(true, |(_, b)| d2 < b) {
                best = Some((id, d2));
            }
        });
        best.map(|(id, d2)| (id, d2.sqrt()))
            .filter(|&(_, d)| d <= self.net.epsilon + NORM_SLACK)
    }

    /// Lifts a unit vector `x ∈ S^{n−1}` to `y = (u, k x″)` with `u` the
    /// net point nearest to `x′ = x[..m]` and `k = √(1−|u|²)/√(1−|x′|²)`.
    pub fn lift_to_sphere(&self, x: &[f64]) -> Result<(Vec<f64>, RhoMetricPoint)> {
        let m = self.net.m;
        if x.len() <= m {
            return Err(Error::Dimension(format!(
                "need n > m, got n = {}, m = {m}",
                x.len()
            )));
        }
        if (norm(x) - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("x must be a unit vector, |x| = {}", norm(x))));
        }
        let (head, tail) = x.split_at(m);
        let (query, sign) = match self.net.kind {
            NetKind::Interval => (vec![head[0].abs()], head[0].signum()),
            NetKind::Ball => (head.to_vec(), 1.0),
        };
        let (id, _) = self.nearest_within(&query).ok_or_else(|| {
            Error::Certification(format!("no net point within epsilon of {query:?}"))
        })?;
        let u: Vec<f64> = self.net.points[id].coords.iter().map(|v| sign * v).collect();
        let tail_norm = norm(tail);
        let mut y = u.clone();
        if tail_norm == 0.0 {
            y.extend(std::iter::repeat(0.0).take(tail.len()));
        } else {
            let k = height(&u) / tail_norm;
            y.extend(tail.iter().map(|v| k * v));
        }
        Ok((y, RhoMetricPoint { coords: u }))
    }
}

/// One-shot form of [`NetIndex::lift_to_sphere`].
pub fn lift_to_sphere(x: &[f64], net: &EpsilonNet) -> Result<(Vec<f64>, RhoMetricPoint)> {
    NetIndex::new(net).lift_to_sphere(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub samples: usize,
    pub max_distance: f64,
    pub passed: bool,
}

/// Draws `samples` uniform points of the net's domain and records the
/// largest `ρ` distance to the net. Points with no net point inside `ε`
/// count as infinitely far.
pub fn certify_coverage<R: Rng + ?Sized>(
    net: &EpsilonNet,
    samples: usize,
    rng: &mut R,
) -> Result<CoverageReport> {
    if net.is_empty() {
        return Err(Error::Certification("empty net".into()));
    }
    let index = net.index();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = match net.kind {
            NetKind::Interval => vec![rng.random::<f64>()],
            NetKind::Ball => {
                let dir = random_unit(net.m, rng);
                let radius = rng.random::<f64>().powf(1.0 / net.m as f64);
                dir.into_iter().map(|v| radius * v).collect()
            }
        };
        let d = index.nearest_within(&x).map_or(f64::INFINITY, |(_, d)| d);
        worst = worst.max(d);
    }
    Ok(CoverageReport {
        samples,
        max_distance: worst,
        passed: worst <= net.epsilon + NORM_SLACK,
    })
}
