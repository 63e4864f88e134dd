//! Deterministic limits, Stieltjes transforms, and deviation-bound right-hand
//! sides for the deformed GOE and the spiked population model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Supercritical,
    BulkEdgeTop,
    BulkEdgeBottom,
    SubcriticalLow,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Supercritical => "supercritical",
            Branch::BulkEdgeTop => "bulk_edge_top",
            Branch::BulkEdgeBottom => "bulk_edge_bottom",
            Branch::SubcriticalLow => "subcritical_low",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitModel {
    Goe,
    Spiked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterministicLimit {
    pub value: f64,
    pub branch: Branch,
    pub model: LimitModel,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {x}")))
    }
}

/// `λ_θ = θ + σ²/θ` above the threshold `θ > σ`, else the bulk edge `2σ`.
pub fn lambda_theta(theta: f64, sigma: f64) -> Result<DeterministicLimit> {
    positive("theta", theta)?;
    positive("sigma", sigma)?;
    let (value, branch) = if theta > sigma {
        (theta + sigma * sigma / theta, Branch::Supercritical)
    } else {
        (2.0 * sigma, Branch::BulkEdgeTop)
    };
    Ok(DeterministicLimit {
        value,
        branch,
        model: LimitModel::Goe,
    })
}

/// The spiked-model limit `λ_{θ,c}` as a function of the population
/// eigenvalue `θ²` and the aspect ratio `c`.
pub fn lambda_theta_c(theta_sq: f64, c: f64) -> Result<DeterministicLimit> {
    positive("theta^2", theta_sq)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain(format!("c must be finite and >= 0, got {c}")));
    }
    if theta_sq == 1.0 {
        return Err(Error::Domain("theta^2 = 1 is excluded".into()));
    }
    if theta_sq < 1.0 && c >= 1.0 {
        return Err(Error::Domain(format!(
            "theta^2 = {theta_sq} < 1 needs c < 1, got c = {c}"
        )));
    }
    let rc = c.sqrt();
    let spike_value = theta_sq + c * theta_sq / (theta_sq - 1.0);
    let (value, branch) = if theta_sq > 1.0 + rc {
        (spike_value, Branch::Supercritical)
    } else if theta_sq > 1.0 {
        ((1.0 + rc).powi(2), Branch::BulkEdgeTop)
    } else if theta_sq < 1.0 - rc {
        (spike_value, Branch::SubcriticalLow)
    } else {
        ((1.0 - rc).powi(2), Branch::BulkEdgeBottom)
    };
    Ok(DeterministicLimit {
        value,
        branch,
        model: LimitModel::Spiked,
    })
}

/// Stieltjes transform of the semicircle law on `[−2σ, 2σ]` and its
/// derivative, evaluated right of the bulk.
pub fn semicircle_stieltjes(z: f64, sigma: f64) -> Result<(f64, f64)> {
    positive("sigma", sigma)?;
    if !(z.is_finite() && z > 2.0 * sigma) {
        return Err(Error::Domain(format!(
            "z = {z} must lie right of the bulk edge 2*sigma = {}",
            2.0 * sigma
        )));
    }
    let s2 = sigma * sigma;
    let root = (z * z - 4.0 * s2).sqrt();
    let g = (-z + root) / (2.0 * s2);
    let gp = (-1.0 + z / root) / (2.0 * s2);
    Ok((g, gp))
}

/// Stieltjes transform `g(z) = (c − 1 − z + √((z−1−c)² − 4c)) / (2z)` of the
/// Marchenko–Pastur companion law, and its derivative, off the bulk.
///
/// The square root takes the sign of `z − 1 − c`, so that `g(z) → 0` as
/// `|z| → ∞` on both sides of the bulk.
pub fn mp_stieltjes(z: f64, c: f64) -> Result<(f64, f64)> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain(format!("c must be finite and >= 0, got {c}")));
    }
    if !z.is_finite() || z == 0.0 {
        return Err(Error::Domain(format!("z must be finite and nonzero, got {z}")));
    }
    let rc = c.sqrt();
    let (lo, hi) = ((1.0 - rc).powi(2), (1.0 + rc).powi(2));
    if (lo..=hi).contains(&z) {
        return Err(Error::Domain(format!(
            "z = {z} lies in the bulk [{lo}, {hi}]"
        )));
    }
    let w = z - 1.0 - c;
    let s = if w > 0.0 { 1.0 } else { -1.0 };
    let root = (w * w - 4.0 * c).max(0.0).sqrt();
    let num = c - 1.0 - z + s * root;
    let g = num / (2.0 * z);
    let dnum = -1.0 + s * w / root;
    let gp = (dnum * z - num) / (2.0 * z * z);
    Ok((g, gp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// Upper tail of the top GOE eigenvalues.
    T1i,
    /// Lower tail of the supercritical GOE eigenvalues.
    T1ii,
    /// Upper tail of the top sample eigenvalues.
    T2i,
    /// Lower tail of the supercritical sample eigenvalues.
    T2ii,
    /// Lower tail of the bottom sample eigenvalues.
    T3i,
    /// Upper tail of the subcritical-low sample eigenvalues.
    T3ii,
}

impl Theorem {
    pub fn is_goe(&self) -> bool {
        matches!(self, Theorem::T1i | Theorem::T1ii)
    }

    /// The lower-tail statements hold on the truncation event B.
    pub fn is_reverse(&self) -> bool {
        matches!(self, Theorem::T1ii | Theorem::T2ii | Theorem::T3ii)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::T1i => "t1i",
            Theorem::T1ii => "t1ii",
            Theorem::T2i => "t2i",
            Theorem::T2ii => "t2ii",
            Theorem::T3i => "t3i",
            Theorem::T3ii => "t3ii",
        }
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1i" => Ok(Theorem::T1i),
            "t1ii" => Ok(Theorem::T1ii),
            "t2i" => Ok(Theorem::T2i),
            "t2ii" => Ok(Theorem::T2ii),
            "t3i" => Ok(Theorem::T3i),
            "t3ii" => Ok(Theorem::T3ii),
            other => Err(Error::Parameter(format!("unknown theorem '{other}'"))),
        }
    }
}

pub const DEFAULT_C1: f64 = 2.0;
pub const DEFAULT_C2: f64 = 0.25;
/// Prefactor used for the sample-covariance lower tails when none is given.
pub const DEFAULT_C2_SPIKED: f64 = 8.0;

/// Inputs to a deviation bound.
///
/// `spikes` holds `θ_1 ≥ … ≥ θ_r` for the GOE statements and the population
/// eigenvalues `θ_1² ≥ … ≥ θ_{r+s}²` for the sample-covariance statements;
/// `r` and `s` are read off from it. `i` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub theorem: Theorem,
    pub n: usize,
    #[serde(default)]
    pub p: usize,
    pub i: usize,
    #[serde(default = "one")]
    pub sigma: f64,
    pub t: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub spikes: Vec<f64>,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub c3: Option<f64>,
}

fn one() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.25
}
fn default_c1() -> f64 {
    DEFAULT_C1
}

/// Which order statistic a tail event refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenRank {
    /// `λ_i`, counted from the top.
    Top(usize),
    /// `λ_{p−i+1}`, counted from the bottom.
    Bottom(usize),
}

/// The probabilised event of a bound: `stat ≥ threshold` when `upper`,
/// `stat ≤ threshold` otherwise, where `stat` is the chosen eigenvalue or
/// its square root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEvent {
    pub rank: EigenRank,
    pub sqrt: bool,
    pub upper: bool,
    pub threshold: f64,
    /// `λ_θ` or `λ_{θ,c}` on the eigenvalue scale.
    pub center: f64,
}

impl TailEvent {
    pub fn holds(&self, eigenvalue: f64) -> bool {
        let stat = if self.sqrt {
            eigenvalue.max(0.0).sqrt()
        } else {
            eigenvalue
        };
        if self.upper {
            stat >= self.threshold
        } else {
            stat <= self.threshold
        }
    }
}

/// `C_{m,θ}(n)` given `C_{1,θ}(n)`, with `C_{0,θ}(n) = 1`.
pub fn c_m(m: usize, c1: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => c1,
        _ => {
            let k = (m - 1) as f64;
            2.0 * m as f64 * c1 * (1.0 + c1 / k).powf(k)
        }
    }
}

/// `C_{1,θ}(n)` for the GOE statements.
pub fn c1_goe(theta: f64, sigma: f64, t: f64, n: usize) -> Result<f64> {
    let lam = lambda_theta(theta, sigma)?.value;
    Ok(2.0 * t * (lam + t) * n as f64 / (sigma * sigma))
}

/// `C_{1,θ}(n)` for the sample-covariance statements. At `θ² = 1` the limit
/// is taken as the bulk edge `(1+√c)²`.
pub fn c1_spiked(theta_sq: f64, c: f64, t: f64, n: usize) -> Result<f64> {
    let root = if theta_sq == 1.0 {
        1.0 + c.sqrt()
    } else {
        lambda_theta_c(theta_sq, c)?.value.sqrt()
    };
    Ok(2.0 * t * (root + t) * n as f64 / theta_sq)
}

/// Default `C₃` for a spike of strength `θ` (not squared): the GOE rate
/// `C₂(θ−1)⁵/(θ+1)³` at `σ = 1`, with `|θ−1|` for spikes below one.
pub fn default_c3(theta: f64) -> f64 {
    DEFAULT_C2 * (theta - 1.0).abs().powi(5) / (theta + 1.0).powi(3)
}

impl BoundParams {
    pub fn new(theorem: Theorem, n: usize, p: usize, i: usize, t: f64, spikes: Vec<f64>) -> Self {
        Self {
            theorem,
            n,
            p,
            i,
            sigma: 1.0,
            t,
            delta: default_delta(),
            spikes,
            c1: DEFAULT_C1,
            c2: None,
            c3: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    /// Number of spikes above the noise level one (all GOE spikes count).
    pub fn r(&self) -> usize {
        if self.theorem.is_goe() {
            self.spikes.len()
        } else {
            self.spikes.iter().filter(|&&x| x > 1.0).count()
        }
    }

    pub fn s(&self) -> usize {
        if self.theorem.is_goe() {
            0
        } else {
            self.spikes.iter().filter(|&&x| x < 1.0).count()
        }
    }

    pub fn c2(&self) -> f64 {
        self.c2.unwrap_or(match self.theorem {
            Theorem::T2ii | Theorem::T3ii => DEFAULT_C2_SPIKED,
            _ => DEFAULT_C2,
        })
    }

    fn check_common(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        if self.i == 0 {
            return Err(Error::Parameter("eigen index i is 1-based".into()));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::Parameter(format!("t must be >= 0, got {}", self.t)));
        }
        if self.spikes.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Parameter("spikes must be finite and > 0".into()));
        }
        if self.spikes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parameter("spikes must be non-increasing".into()));
        }
        if self.theorem.is_goe() {
            positive("sigma", self.sigma).map_err(|e| Error::Parameter(e.to_string()))?;
            if self.spikes.len() > self.n {
                return Err(Error::Parameter(format!(
                    "r = {} exceeds n = {}",
                    self.spikes.len(),
                    self.n
                )));
            }
        } else {
            if self.p == 0 {
                return Err(Error::Parameter("p must be at least 1".into()));
            }
            if self.spikes.contains(&1.0) {
                return Err(Error::Parameter("spike value theta^2 = 1 is excluded".into()));
            }
            if self.spikes.len() > self.p {
                return Err(Error::Parameter(format!(
                    "r + s = {} exceeds p = {}",
                    self.spikes.len(),
                    self.p
                )));
            }
        }
        if let Some(c3) = self.c3 {
            if !(c3.is_finite() && c3 > 0.0) {
                return Err(Error::Parameter(format!("C3 must be > 0, got {c3}")));
            }
        }
        Ok(())
    }

    fn check_delta(&self, max: f64, label: &str) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= max) {
            return Err(Error::Parameter(format!(
                "delta = {} outside (0, {label}]",
                self.delta
            )));
        }
        Ok(())
    }

    fn check_floor(&self, floor: f64) -> Result<()> {
        if self.t < floor {
            return Err(Error::Parameter(format!(
                "t = {} below the floor {floor:.12e} for {}",
                self.t,
                self.theorem.as_str()
            )));
        }
        Ok(())
    }

    /// Smallest admissible `t` for the current `δ`, or zero when the
    /// statement holds for all `t ≥ 0`.
    pub fn t_floor(&self) -> Result<f64> {
        self.check_common()?;
        let n = self.n as f64;
        let dd = (self.delta * (1.0 - self.delta) * n).sqrt();
        let r = self.r();
        let s = self.s();
        Ok(match self.theorem {
            Theorem::T1i if r > 0 => {
                let m = (r + 1).saturating_sub(self.i).max(1) as f64;
                (2.0 * m).sqrt() * self.sigma / dd
            }
            Theorem::T2i if r > 0 => {
                let m = (r + 1).saturating_sub(self.i).max(1) as f64;
                let theta = self.spikes[(self.i - 1).min(r - 1)].sqrt();
                m.sqrt() * theta / dd
            }
            Theorem::T3i if r + s > 0 => {
                let t1 = self.spikes[0].sqrt().max(1.0);
                let m = if s > 0 {
                    (r + s + 1).saturating_sub(self.i).max(1)
                } else {
                    r
                } as f64;
                m.sqrt() * t1 / dd
            }
            _ => 0.0,
        })
    }

    /// Validates the parameters and returns the event the bound controls.
    pub fn event(&self) -> Result<TailEvent> {
        self.check_common()?;
        let n = self.n as f64;
        let i = self.i;
        let r = self.r();
        let s = self.s();
        match self.theorem {
            Theorem::T1i => {
                let (center, rank_ok) = if r == 0 {
                    (2.0 * self.sigma, i == 1)
                } else {
                    (
                        self.spikes
                            .get(i - 1)
                            .map(|&th| lambda_theta(th, self.sigma).map(|l| l.value))
                            .transpose()?
                            .unwrap_or(f64::NAN),
                        i <= r,
                    )
                };
                if !rank_ok {
                    return Err(Error::Parameter(format!("need 1 <= i <= max(r, 1), got i = {i}")));
                }
                Ok(TailEvent {
                    rank: EigenRank::Top(i),
                    sqrt: false,
                    upper: true,
                    threshold: center + self.t,
                    center,
                })
            }
            Theorem::T1ii => {
                let r0 = self.spikes.iter().filter(|&&th| th > self.sigma).count();
                if i > r0 {
                    return Err(Error::Parameter(format!(
                        "i = {i} exceeds r0 = {r0}, the number of spikes above sigma"
                    )));
                }
                let center = lambda_theta(self.spikes[i - 1], self.sigma)?.value;
                Ok(TailEvent {
                    rank: EigenRank::Top(i),
                    sqrt: false,
                    upper: false,
                    threshold: center - self.t - self.c1 * self.sigma * r as f64 / n,
                    center,
                })
            }
            Theorem::T2i => {
                let c = (self.p - r) as f64 / n;
                let center = if r == 0 {
                    if i != 1 {
                        return Err(Error::Parameter("r = 0 allows only i = 1".into()));
                    }
                    (1.0 + (self.p as f64 / n).sqrt()).powi(2)
                } else {
                    if i > r {
                        return Err(Error::Parameter(format!("need 1 <= i <= r = {r}, got {i}")));
                    }
                    lambda_theta_c(self.spikes[i - 1], c)?.value
                };
                Ok(TailEvent {
                    rank: EigenRank::Top(i),
                    sqrt: true,
                    upper: true,
                    threshold: center.sqrt() + self.t,
                    center,
                })
            }
            Theorem::T2ii => {
                let c = (self.p - r) as f64 / n;
                let r0 = self
                    .spikes
                    .iter()
                    .filter(|&&x| x > 1.0 + c.sqrt())
                    .count();
                if i > r0 {
                    return Err(Error::Parameter(format!(
                        "i = {i} exceeds r0 = {r0}, the number of spikes above 1 + sqrt(c)"
                    )));
                }
                let center = lambda_theta_c(self.spikes[i - 1], c)?.value;
                let theta1 = self.spikes[0].sqrt();
                Ok(TailEvent {
                    rank: EigenRank::Top(i),
                    sqrt: true,
                    upper: false,
                    threshold: center.sqrt() - self.t - self.c1 * theta1 * r as f64 / n,
                    center,
                })
            }
            Theorem::T3i => {
                if self.n <= self.p {
                    return Err(Error::Parameter(format!(
                        "smallest-eigenvalue bounds need n > p, got n = {}, p = {}",
                        self.n, self.p
                    )));
                }
                let c_prime = (self.p - r - s) as f64 / n;
                let t1 = self.spikes.first().map_or(1.0, |x| x.sqrt().max(1.0));
                let (center, shift) = if s > 0 {
                    if i > s {
                        return Err(Error::Parameter(format!("need 1 <= i <= s = {s}, got {i}")));
                    }
                    let theta_sq = self.spikes[r + s - i];
                    (lambda_theta_c(theta_sq, c_prime)?.value, t1 / (2.0 * n))
                } else {
                    if i != 1 {
                        return Err(Error::Parameter("s = 0 allows only i = 1".into()));
                    }
                    let shift = if r > 0 { t1 / (2.0 * n) } else { 0.0 };
                    ((1.0 - c_prime.sqrt()).powi(2), shift)
                };
                Ok(TailEvent {
                    rank: EigenRank::Bottom(i),
                    sqrt: true,
                    upper: false,
                    threshold: center.sqrt() - shift - self.t,
                    center,
                })
            }
            Theorem::T3ii => {
                let c_prime = (self.p - r - s) as f64 / n;
                let s0 = self
                    .spikes
                    .iter()
                    .filter(|&&x| x < 1.0 - c_prime.sqrt())
                    .count();
                if i > s0 {
                    return Err(Error::Parameter(format!(
                        "i = {i} exceeds s0 = {s0}, the number of spikes below 1 - sqrt(c')"
                    )));
                }
                let center = lambda_theta_c(self.spikes[r + s - i], c_prime)?.value;
                let theta1 = self.spikes[0].sqrt();
                Ok(TailEvent {
                    rank: EigenRank::Bottom(i),
                    sqrt: true,
                    upper: true,
                    threshold: center.sqrt() + self.t + self.c1 * theta1 * (r + s) as f64 / n,
                    center,
                })
            }
        }
    }

    /// The right-hand side of the selected deviation bound. Values above one
    /// are returned as computed.
    pub fn bound_rhs(&self) -> Result<f64> {
        self.event()?;
        let n = self.n as f64;
        let t = self.t;
        let i = self.i;
        let r = self.r();
        let s = self.s();
        let value = match self.theorem {
            Theorem::T1i => {
                let s2 = self.sigma * self.sigma;
                if r == 0 {
                    (-n * t * t / (4.0 * s2)).exp()
                } else {
                    self.check_delta(0.5, "1/2")?;
                    self.check_floor(self.t_floor()?)?;
                    let m = r - i + 1;
                    let c1 = c1_goe(self.spikes[i - 1], self.sigma, t, self.n)?;
                    let e = (1.0 - self.delta).powi(2) * n * t * t / (4.0 * s2);
                    2.0 * c_m(m, c1) * (-e).exp()
                }
            }
            Theorem::T1ii => {
                let th = self.spikes[i - 1];
                let sg = self.sigma;
                let nr = (self.n - r) as f64;
                let first = -(nr * (th - sg).powi(4)) / (16.0 * sg * sg * th * th);
                let second =
                    -(self.c2() * nr * (th - sg).powi(5) * t * t) / (sg.powi(4) * (th + sg).powi(3));
                first.exp() + 8.0 * i as f64 * second.exp()
            }
            Theorem::T2i => {
                if r == 0 {
                    (-n * t * t / 2.0).exp()
                } else {
                    self.check_delta(1.0 / 3.0, "1/3")?;
                    self.check_floor(self.t_floor()?)?;
                    let c = (self.p - r) as f64 / n;
                    let theta_sq = self.spikes[i - 1];
                    let c1 = c1_spiked(theta_sq, c, t, self.n)?;
                    let e = (1.0 - self.delta).powi(2) * n * t * t / (2.0 * theta_sq);
                    c_m(r - i + 1, c1) * (-e).exp()
                }
            }
            Theorem::T2ii => {
                let c3 = self.c3.unwrap_or_else(|| default_c3(self.spikes[i - 1].sqrt()));
                self.c2() * i as f64 * (-c3 * n * t * t).exp()
            }
            Theorem::T3i => {
                if r + s == 0 {
                    (-n * t * t / 2.0).exp()
                } else {
                    self.check_delta(1.0 / 3.0, "1/3")?;
                    self.check_floor(self.t_floor()?)?;
                    let c = (self.p - r) as f64 / n;
                    let t1_sq = self.spikes[0].max(1.0);
                    let c1 = c1_spiked(t1_sq, c, t, self.n)?;
                    let e = (1.0 - self.delta).powi(2) * n * t * t / (2.0 * t1_sq);
                    let prefactor = if s > 0 {
                        c_m(r + s - i + 1, c1) + c_m(r, c1)
                    } else {
                        2.0 * c_m(r, c1)
                    };
                    prefactor * (-e).exp()
                }
            }
            Theorem::T3ii => {
                let theta = self.spikes[r + s - i].sqrt();
                let c3 = self.c3.unwrap_or_else(|| default_c3(theta));
                self.c2() * i as f64 * (-c3 * n * t * t).exp()
            }
        };
        Ok(value.max(0.0))
    }
}

/// Free-function form of [`BoundParams::bound_rhs`].
pub fn bound_rhs(params: &BoundParams) -> Result<f64> {
    params.bound_rhs()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint rule in the angle variable of the semicircle density.
    fn semicircle_quadrature(z: f64, sigma: f64) -> (f64, f64) {
        let k = 4000;
        let (mut g, mut gp) = (0.0, 0.0);
        for j in 0..k {
            let phi = std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
            let x = 2.0 * sigma * phi.cos();
            let w = 2.0 / std::f64::consts::PI * phi.sin().powi(2) * std::f64::consts::PI / k as f64;
            g += w / (x - z);
            gp += w / (x - z).powi(2);
        }
        (g, gp)
    }

    /// Companion law `(1−c)⁺ δ₀ + c · MP_c`, with the continuous part
    /// integrated by the midpoint rule in the angle variable.
    fn mp_quadrature(z: f64, c: f64) -> (f64, f64) {
        let k = 4000;
        let (m, h) = (1.0 + c, 2.0 * c.sqrt());
        let (mut g, mut gp) = (0.0, 0.0);
        for j in 0..k {
            let phi = std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
            let x = m + h * phi.cos();
            let dens = h * h * phi.sin().powi(2) / (2.0 * std::f64::consts::PI * c * x);
            let w = c * dens * std::f64::consts::PI / k as f64;
            g += w / (x - z);
            gp += w / (x - z).powi(2);
        }
        let atom = (1.0 - c).max(0.0);
        (g - atom / z, gp + atom / (z * z))
    }

    #[test]
    fn goe_limit_branches() {
        let a = lambda_theta(2.0, 1.0).unwrap();
        assert_eq!(a.value, 2.5);
        assert_eq!(a.branch, Branch::Supercritical);
        let b = lambda_theta(0.5, 1.0).unwrap();
        assert_eq!(b.value, 2.0);
        assert_eq!(b.branch, Branch::BulkEdgeTop);
        assert_eq!(lambda_theta(1.3, 1.3).unwrap().value, 2.6);
        assert!((lambda_theta(1.3 + 1e-12, 1.3).unwrap().value - 2.6).abs() < 1e-11);
        assert!(matches!(lambda_theta(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(lambda_theta(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn spiked_limit_branches() {
        let a = lambda_theta_c(4.0, 1.0).unwrap();
        assert!((a.value - 16.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.branch, Branch::Supercritical);
        let b = lambda_theta_c(1.5, 1.0).unwrap();
        assert_eq!(b.value, 4.0);
        assert_eq!(b.branch, Branch::BulkEdgeTop);
        assert_eq!(lambda_theta_c(4.0, 0.0).unwrap().value, 4.0);
        let low = lambda_theta_c(0.25, 0.25).unwrap();
        assert!((low.value - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(low.branch, Branch::SubcriticalLow);
        let edge = lambda_theta_c(0.6, 0.25).unwrap();
        assert_eq!(edge.value, 0.25);
        assert_eq!(edge.branch, Branch::BulkEdgeBottom);
        assert!(lambda_theta_c(1.0, 0.5).is_err());
        assert!(lambda_theta_c(0.5, 1.0).is_err());
        assert!(lambda_theta_c(0.5, 2.0).is_err());
    }

    #[test]
    fn semicircle_point_values_and_quadrature() {
        let (g, gp) = semicircle_stieltjes(2.5, 1.0).unwrap();
        assert!((g + 0.5).abs() < 1e-15);
        assert!((gp - 1.0 / 3.0).abs() < 1e-14);
        let (g, _) = semicircle_stieltjes(100.0, 1.0).unwrap();
        assert!((g * 100.0 + 1.0).abs() < 1e-3);
        for &(z, sigma) in &[(2.1, 1.0), (2.5, 1.0), (3.0, 1.0), (5.0, 2.0), (1.3, 0.6), (40.0, 3.0)] {
            let (g, gp) = semicircle_stieltjes(z, sigma).unwrap();
            let (qg, qgp) = semicircle_quadrature(z, sigma);
            assert!((g - qg).abs() < 1e-6, "g at z={z}: {g} vs {qg}");
            assert!((gp - qgp).abs() < 1e-6, "g' at z={z}: {gp} vs {qgp}");
        }
        assert!(semicircle_stieltjes(2.0, 1.0).is_err());
    }

    #[test]
    fn mp_point_values_and_quadrature() {
        let (g, gp) = mp_stieltjes(16.0 / 3.0, 1.0).unwrap();
        assert!((g + 0.25).abs() < 1e-14);
        assert!((gp - 9.0 / 128.0).abs() < 1e-14);
        let (g, _) = mp_stieltjes(1.0 / 6.0, 0.25).unwrap();
        assert!((g + 4.0).abs() < 1e-12);
        let (g, _) = mp_stieltjes(1e4, 1.0).unwrap();
        assert!((g * 1e4 + 1.0).abs() < 1e-3);
        for &(z, c) in &[
            (5.0, 1.0),
            (3.0, 0.5),
            (10.0, 2.0),
            (0.1, 0.25),
            (0.2, 0.3),
            (-1.0, 0.5),
            (0.05, 3.0),
            (7.0, 0.1),
        ] {
            let (g, gp) = mp_stieltjes(z, c).unwrap();
            let (qg, qgp) = mp_quadrature(z, c);
            assert!((g - qg).abs() < 1e-6, "g at ({z}, {c}): {g} vs {qg}");
            assert!((gp - qgp).abs() < 1e-6, "g' at ({z}, {c}): {gp} vs {qgp}");
        }
        assert!(mp_stieltjes(2.0, 1.0).is_err());
        assert!(mp_stieltjes(0.0, 0.5).is_err());
    }

    #[test]
    fn null_case_bounds() {
        let b = BoundParams::new(Theorem::T1i, 200, 0, 1, 0.0, vec![]);
        assert_eq!(b.bound_rhs().unwrap(), 1.0);
        let b = BoundParams::new(Theorem::T2i, 100, 50, 1, 0.3, vec![]);
        assert!((b.bound_rhs().unwrap() - (-4.5f64).exp()).abs() < 1e-15);
        assert!((b.bound_rhs().unwrap() - 0.011109).abs() < 1e-6);
    }

    #[test]
    fn reverse_goe_bound_at_zero() {
        let b = BoundParams::new(Theorem::T1ii, 100, 0, 1, 0.0, vec![2.0]);
        let expected = (-(99.0) / (16.0 * 4.0f64)).exp() + 8.0;
        assert!((b.bound_rhs().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn floors_and_delta_ranges_are_enforced() {
        let b = BoundParams::new(Theorem::T1i, 100, 0, 1, 0.1, vec![2.0]).with_delta(0.5);
        let err = b.bound_rhs().unwrap_err();
        assert!(err.to_string().contains("floor"), "{err}");
        assert!(b.with_t(0.3).bound_rhs().is_ok());
        let b = BoundParams::new(Theorem::T1i, 100, 0, 1, 1.0, vec![2.0]).with_delta(0.6);
        assert!(b.bound_rhs().unwrap_err().to_string().contains("delta"));
        let b = BoundParams::new(Theorem::T2i, 400, 100, 1, 1.0, vec![4.0]).with_delta(0.4);
        assert!(b.bound_rhs().is_err());
        let b = BoundParams::new(Theorem::T3i, 100, 100, 1, 1.0, vec![]);
        assert!(b.bound_rhs().is_err());
        let b = BoundParams::new(Theorem::T1ii, 100, 0, 1, 1.0, vec![0.5]);
        assert!(b.bound_rhs().is_err());
    }

    #[test]
    fn c_constants() {
        assert_eq!(c_m(0, 5.0), 1.0);
        assert_eq!(c_m(1, 5.0), 5.0);
        assert!((c_m(2, 5.0) - 4.0 * 5.0 * 6.0).abs() < 1e-12);
        assert!((c_m(3, 2.0) - 6.0 * 2.0 * 4.0).abs() < 1e-12);
        assert!((c1_goe(2.0, 1.0, 0.5, 100).unwrap() - 2.0 * 0.5 * 3.0 * 100.0).abs() < 1e-9);
    }

    #[test]
    fn events_for_each_statement() {
        let e = BoundParams::new(Theorem::T1i, 100, 0, 1, 0.5, vec![2.0]).event().unwrap();
        assert_eq!(e.threshold, 3.0);
        assert!(e.upper && !e.sqrt);
        let e = BoundParams::new(Theorem::T1ii, 100, 0, 1, 0.5, vec![2.0]).event().unwrap();
        assert!((e.threshold - (2.5 - 0.5 - 0.02)).abs() < 1e-15);
        let e = BoundParams::new(Theorem::T2i, 400, 100, 1, 0.3, vec![]).event().unwrap();
        assert!((e.threshold - 1.8).abs() < 1e-15);
        let e = BoundParams::new(Theorem::T3i, 400, 100, 1, 0.1, vec![]).event().unwrap();
        assert!((e.threshold - 0.4).abs() < 1e-15);
        assert_eq!(e.rank, EigenRank::Bottom(1));
        assert!(e.holds(0.15) && !e.holds(0.17));
        let e = BoundParams::new(Theorem::T3ii, 1000, 251, 1, 0.1, vec![0.25]).event().unwrap();
        assert!((e.center - 1.0 / 6.0).abs() < 1e-12);
        assert!(e.upper);
    }
}
