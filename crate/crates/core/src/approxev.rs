//! Explicit approximate eigenvectors for the deformed GOE and the spiked
//! population model, built from the Schur-complement structure of the
//! sampled matrix.
//!
//! Each construction conditions on a truncation event `B` that keeps the
//! spectrum of the undeformed block `G̃` away from the target eigenvalue. When
//! `B` fails the report carries no vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensembles::{ModelKind, SampleDraw};
use crate::error::{Error, Result};
use crate::limits::{lambda_theta, lambda_theta_c, mp_stieltjes, semicircle_stieltjes, LimitModel};
use crate::linalg::{eig_sym, Resolvent, Spectrum, SymMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxEvReport {
    pub model: LimitModel,
    /// 1-based spike index the vector targets.
    pub i: usize,
    /// Aspect ratio used for the spiked predictions, `(p − r − s)/n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub target: f64,
    pub lambda0: f64,
    /// Extreme eigenvalue of the undeformed block that decides event B.
    pub block_extreme: f64,
    pub event_b_ok: bool,
    pub x: Option<Vec<f64>>,
    pub rayleigh: Option<f64>,
    /// `target − rayleigh`.
    pub gap: Option<f64>,
    /// The same gap evaluated through the closed-form expansion.
    pub gap_expansion: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub l1_pred: f64,
    pub l2_pred: f64,
    /// Largest coordinate difference between `y = Xᵀx/√n` and
    /// `(aI − λbS)v` (spiked model only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_residual: Option<f64>,
}

impl ApproxEvReport {
    /// `|gap − gap_expansion|`, when both are available.
    pub fn identity_residual(&self) -> Option<f64> {
        Some((self.gap? - self.gap_expansion?).abs())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `G̃ = √(n/m) · A[r.., r..]`, which is `GOE(m, σ²/m)`.
pub fn goe_block(draw: &SampleDraw) -> Result<SymMatrix> {
    let n = draw.spec.n;
    let r = draw.spec.spikes.len();
    if r >= n {
        return Err(Error::Dimension(format!("need r < n, got r = {r}, n = {n}")));
    }
    let m = n - r;
    let scale = (n as f64 / m as f64).sqrt();
    let block = draw.matrix.trailing_block(r)?.into_matrix() * scale;
    SymMatrix::from_dmatrix(block)
}

/// Approximate eigenvector for the `i`-th GOE spike (`θ_i > σ`).
pub fn goe_approx_ev(draw: &SampleDraw, i: usize) -> Result<ApproxEvReport> {
    let spec = &draw.spec;
    if spec.model != ModelKind::DeformedGoe {
        return Err(Error::Parameter("goe_approx_ev needs a deformed GOE draw".into()));
    }
    let r = spec.spikes.len();
    if i == 0 || i > r {
        return Err(Error::Parameter(format!("spike index must be in 1..={r}, got {i}")));
    }
    let sigma = spec.sigma();
    let theta = spec.spikes[i - 1];
    if theta <= sigma {
        return Err(Error::Subcritical(format!(
            "theta_{i} = {theta} does not exceed sigma = {sigma}"
        )));
    }
    let n = spec.n;
    let m = n - r;
    let lambda = lambda_theta(theta, sigma)?.value;
    let (l1_pred, l2_pred) = semicircle_stieltjes(lambda, sigma)?;
    let lambda0 = 0.5 * (2.0 * sigma + lambda);

    let gt = goe_block(draw)?;
    let spectrum = eig_sym(&gt, true)?;
    let block_extreme = spectrum.largest();
    let mut report = ApproxEvReport {
        model: LimitModel::Goe,
        i,
        c: None,
        target: lambda,
        lambda0,
        block_extreme,
        event_b_ok: block_extreme <= lambda0,
        x: None,
        rayleigh: None,
        gap: None,
        gap_expansion: None,
        l1: None,
        l2: None,
        l1_pred,
        l2_pred,
        y_residual: None,
    };
    if !report.event_b_ok {
        return Ok(report);
    }

    let sqrt_mn = (m as f64 / n as f64).sqrt();
    let v: Vec<f64> = (r..n)
        .map(|j| draw.matrix.get(i - 1, j) / (sqrt_mn * sigma))
        .collect();
    let resolvent = Resolvent::new(&spectrum, lambda)?;
    let (l1, l2) = resolvent.quadratic_forms(&v)?;
    let rv = resolvent.apply(&v)?;

    let xi = (1.0 - sigma * sigma / (theta * theta)).sqrt();
    let tail_scale = -(sigma / theta) / l2.sqrt();
    let mut x = vec![0.0; n];
    x[i - 1] = xi;
    for (k, val) in rv.iter().enumerate() {
        x[r + k] = tail_scale * val;
    }
    let rayleigh = draw.matrix.quadratic_form(&x);

    let s2 = sigma * sigma;
    let th2 = theta * theta;
    let g_ii = draw.matrix.get(i - 1, i - 1) - theta;
    let expansion = (1.0 - (1.0 - r as f64 / n as f64).sqrt()) * 2.0 * s2 / theta
        - g_ii * (1.0 - s2 / th2)
        + sqrt_mn * (s2 / th2) * (-l1 / l2 - (th2 - s2) / theta)
        + sqrt_mn * (2.0 * s2 / theta) * xi * (l1 / l2.sqrt() + (th2 - s2).sqrt() / theta);

    report.x = Some(x);
    report.rayleigh = Some(rayleigh);
    report.gap = Some(lambda - rayleigh);
    report.gap_expansion = Some(expansion);
    report.l1 = Some(l1);
    report.l2 = Some(l2);
    Ok(report)
}

/// Resolvent forms of `S = (G̃ᵀG̃ − λI)⁻¹` for a `q × n` block `G̃`,
/// evaluated through the eigendecomposition of the `q × q` Gram matrix
/// `K = G̃G̃ᵀ` and the identity `G̃ᵀ(K − λI)⁻¹G̃ = I + λS`.
pub struct GramResolvent {
    gt: DMatrix<f64>,
    spectrum: Spectrum,
    lambda: f64,
}

/// `L₁ = vᵀSv`, `L₂ = vᵀS²v`, `Sv`, and `R G̃ v` with `R = (K − λI)⁻¹`.
pub struct GramForms {
    pub l1: f64,
    pub l2: f64,
    pub sv: DVector<f64>,
    pub r_gt_v: DVector<f64>,
}

impl GramResolvent {
    pub fn new(gt: DMatrix<f64>, lambda: f64) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::SingularResolvent { lambda, gap: 0.0 });
        }
        let k = SymMatrix::symmetrize(&(&gt * gt.transpose()))?;
        let spectrum = eig_sym(&k, true)?;
        Resolvent::new(&spectrum, lambda)?;
        Ok(Self {
            gt,
            spectrum,
            lambda,
        })
    }

    pub fn gram_spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn n(&self) -> usize {
        self.gt.ncols()
    }

    pub fn forms(&self, v: &[f64]) -> Result<GramForms> {
        if v.len() != self.n() {
            return Err(Error::Dimension(format!(
                "v has length {}, expected {}",
                v.len(),
                self.n()
            )));
        }
        let vv = DVector::from_column_slice(v);
        let z = &self.gt * &vv;
        let resolvent = Resolvent::new(&self.spectrum, self.lambda)?;
        let rz = resolvent.apply(z.as_slice())?;
        let z_r_z = z.dot(&rz);
        let l1 = (z_r_z - vv.norm_squared()) / self.lambda;
        let sv = (self.gt.tr_mul(&rz) - &vv) / self.lambda;
        let l2 = sv.norm_squared();
        Ok(GramForms {
            l1,
            l2,
            sv,
            r_gt_v: rz,
        })
    }

    /// `(tr S / n, tr S² / n)`.
    pub fn traces(&self) -> (f64, f64) {
        let n = self.n() as f64;
        let q = self.spectrum.len() as f64;
        let lam = self.lambda;
        let (mut t1, mut t2) = (0.0, 0.0);
        for &mu in &self.spectrum.eigenvalues {
            let inv = 1.0 / (mu - lam);
            t1 += inv;
            t2 += inv * inv;
        }
        t1 -= (n - q) / lam;
        t2 += (n - q) / (lam * lam);
        (t1 / n, t2 / n)
    }
}

/// Spiked-model approximate eigenvector for population index `j` (1-based)
/// with limit `lambda`. The vector is only built when the extreme eigenvalue
/// of `G̃G̃ᵀ` lies on the far side of `lambda0` from `lambda`.
fn spm_construct(
    draw: &SampleDraw,
    j: usize,
    report_index: usize,
    lambda: f64,
    lambda0: f64,
    c: f64,
    smallest: bool,
) -> Result<ApproxEvReport> {
    let spec = &draw.spec;
    let data = draw
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("spiked draw carries no data matrix".into()))?;
    let n = spec.n;
    let p = spec.dim();
    let rs = spec.spikes.len();
    let theta_sq = spec.spikes[j - 1];
    let theta = theta_sq.sqrt();
    let sqrt_n = (n as f64).sqrt();
    let (l1_pred, l2_pred) = mp_stieltjes(lambda, c)?;

    let gt = data.rows(rs, p - rs).into_owned() / sqrt_n;
    let v: Vec<f64> = data.row(j - 1).iter().map(|g| g / (theta * sqrt_n)).collect();

    let k = SymMatrix::symmetrize(&(&gt * gt.transpose()))?;
    let kvals = crate::linalg::eigenvalues(&k)?;
    let block_extreme = if smallest {
        *kvals.last().unwrap()
    } else {
        kvals[0]
    };
    let event_b_ok = if smallest {
        block_extreme >= lambda0
    } else {
        block_extreme <= lambda0
    };
    let mut report = ApproxEvReport {
        model: LimitModel::Spiked,
        i: report_index,
        c: Some(c),
        target: lambda,
        lambda0,
        block_extreme,
        event_b_ok,
        x: None,
        rayleigh: None,
        gap: None,
        gap_expansion: None,
        l1: None,
        l2: None,
        l1_pred,
        l2_pred,
        y_residual: None,
    };
    if !event_b_ok {
        return Ok(report);
    }

    let gram = GramResolvent::new(gt, lambda)?;
    let forms = gram.forms(&v)?;
    let (l1, l2) = (forms.l1, forms.l2);
    let denom = lambda * l2 + l1;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "lambda*L2 + L1 = {denom} is not positive"
        )));
    }
    let d = theta_sq - 1.0;
    let xi = ((d * d - c) / (d * (d + c))).sqrt();
    let b = (1.0 - xi * xi).sqrt() / denom.sqrt();
    let a = theta * xi - b;

    let mut x = vec![0.0; p];
    x[j - 1] = xi;
    for (kk, val) in forms.r_gt_v.iter().enumerate() {
        x[rs + kk] = -b * val;
    }
    let rayleigh = draw.matrix.quadratic_form(&x);

    // y = Xᵀx/√n from the data, against (aI − λbS)v.
    let y_def = data.tr_mul(&DVector::from_column_slice(&x)) / sqrt_n;
    let vv = DVector::from_column_slice(&v);
    let y_formula = &vv * a - &forms.sv * (lambda * b);
    let y_residual = (&y_def - &y_formula).amax();

    let expansion = lambda * (1.0 - lambda * b * b * l2) - a * a * dot(&v, &v) + 2.0 * a * b * lambda * l1;

    report.x = Some(x);
    report.rayleigh = Some(rayleigh);
    report.gap = Some(lambda - rayleigh);
    report.gap_expansion = Some(expansion);
    report.l1 = Some(l1);
    report.l2 = Some(l2);
    report.y_residual = Some(y_residual);
    Ok(report)
}

fn spiked_ratio(draw: &SampleDraw) -> Result<f64> {
    if draw.spec.model != ModelKind::SpikedPopulation {
        return Err(Error::Parameter("spiked construction needs a spiked draw".into()));
    }
    let spec = &draw.spec;
    Ok((spec.dim() - spec.spikes.len()) as f64 / spec.n as f64)
}

/// Approximate eigenvector for the `i`-th largest spike (`θ_i² > 1 + √c`),
/// with `c = (p − r − s)/n` the aspect ratio of the unspiked block.
pub fn spm_approx_ev(draw: &SampleDraw, i: usize) -> Result<ApproxEvReport> {
    let c = spiked_ratio(draw)?;
    let spec = &draw.spec;
    let r = spec.r();
    if i == 0 || i > r {
        return Err(Error::Parameter(format!("spike index must be in 1..={r}, got {i}")));
    }
    let theta_sq = spec.spikes[i - 1];
    if theta_sq <= 1.0 + c.sqrt() {
        return Err(Error::Subcritical(format!(
            "theta_{i}^2 = {theta_sq} does not exceed 1 + sqrt(c) = {}",
            1.0 + c.sqrt()
        )));
    }
    let lambda = lambda_theta_c(theta_sq, c)?.value;
    let lambda0 = 0.5 * ((1.0 + c.sqrt()).powi(2) + lambda);
    spm_construct(draw, i, i, lambda, lambda0, c, false)
}

/// Approximate eigenvector for the `i`-th smallest sample eigenvalue, built
/// from spike `r + s − i + 1` (`θ² < 1 − √c`). Event B asks the smallest
/// eigenvalue of `G̃G̃ᵀ` to stay above `λ₀`, the midpoint of the limit and
/// the lower bulk edge. Requires `n > p`.
pub fn spm_approx_ev_smallest(draw: &SampleDraw, i: usize) -> Result<ApproxEvReport> {
    let c = spiked_ratio(draw)?;
    let spec = &draw.spec;
    if spec.n <= spec.dim() {
        return Err(Error::Parameter(format!(
            "smallest-eigenvalue construction needs n > p, got n = {}, p = {}",
            spec.n,
            spec.dim()
        )));
    }
    let s = spec.s();
    if i == 0 || i > s {
        return Err(Error::Parameter(format!("index must be in 1..={s}, got {i}")));
    }
    let j = spec.spikes.len() - i + 1;
    let theta_sq = spec.spikes[j - 1];
    if theta_sq >= 1.0 - c.sqrt() {
        return Err(Error::Subcritical(format!(
            "theta_{j}^2 = {theta_sq} is not below 1 - sqrt(c) = {}",
            1.0 - c.sqrt()
        )));
    }
    let lambda = lambda_theta_c(theta_sq, c)?.value;
    let lambda0 = 0.5 * ((1.0 - c.sqrt()).powi(2) + lambda);
    spm_construct(draw, j, i, lambda, lambda0, c, true)
}

/// Spread of `L₁, L₂` over independent draws of `v` around the normalized
/// traces of the resolvent, for a fixed undeformed block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceProbe {
    pub lambda: f64,
    /// Dimension of `v`.
    pub m: usize,
    pub tr_r_over_m: f64,
    pub tr_r2_over_m: f64,
    pub mean_l1: f64,
    pub std_l1: f64,
    pub mean_l2: f64,
    pub std_l2: f64,
    pub max_dev_l1: f64,
    pub max_dev_l2: f64,
    pub l1_samples: Vec<f64>,
    pub l2_samples: Vec<f64>,
}

impl TraceProbe {
    /// Fraction of draws with `|L₁ − tr R/m| ≥ t`.
    pub fn l1_exceedance(&self, t: f64) -> f64 {
        let hits = self
            .l1_samples
            .iter()
            .filter(|&&l| (l - self.tr_r_over_m).abs() >= t)
            .count();
        hits as f64 / self.l1_samples.len().max(1) as f64
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn summarize(lambda: f64, m: usize, traces: (f64, f64), l1s: Vec<f64>, l2s: Vec<f64>) -> TraceProbe {
    let (mean_l1, std_l1) = mean_std(&l1s);
    let (mean_l2, std_l2) = mean_std(&l2s);
    let max_dev = |xs: &[f64], c: f64| xs.iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
    TraceProbe {
        lambda,
        m,
        tr_r_over_m: traces.0,
        tr_r2_over_m: traces.1,
        mean_l1,
        std_l1,
        mean_l2,
        std_l2,
        max_dev_l1: max_dev(&l1s, traces.0),
        max_dev_l2: max_dev(&l2s, traces.1),
        l1_samples: l1s,
        l2_samples: l2s,
    }
}

fn gaussian_vec<R: Rng + ?Sized>(len: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..len)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Probe for an arbitrary symmetric block: `v` has i.i.d. `N(0, 1/m)`
/// entries and `R = (G̃ − λI)⁻¹`.
pub fn probe_block<R: Rng + ?Sized>(
    gt: &SymMatrix,
    lambda: f64,
    reps: usize,
    rng: &mut R,
) -> Result<TraceProbe> {
    let spectrum = eig_sym(gt, true)?;
    let resolvent = Resolvent::new(&spectrum, lambda)?;
    let m = gt.dim();
    let scale = 1.0 / (m as f64).sqrt();
    let mut l1s = Vec::with_capacity(reps);
    let mut l2s = Vec::with_capacity(reps);
    for _ in 0..reps {
        let v = gaussian_vec(m, scale, rng);
        let (l1, l2) = resolvent.quadratic_forms(&v)?;
        l1s.push(l1);
        l2s.push(l2);
    }
    let traces = (resolvent.trace_over_m(), resolvent.trace_sq_over_m());
    Ok(summarize(lambda, m, traces, l1s, l2s))
}

/// Trace-concentration probe on the undeformed block of a draw: `G̃` for
/// the GOE, `S = (G̃ᵀG̃ − λI)⁻¹` with `v ~ N(0, I/n)` for the spiked model.
pub fn trace_concentration_probe<R: Rng + ?Sized>(
    draw: &SampleDraw,
    lambda: f64,
    reps: usize,
    rng: &mut R,
) -> Result<TraceProbe> {
    if reps == 0 {
        return Err(Error::Parameter("reps must be at least 1".into()));
    }
    match draw.spec.model {
        ModelKind::DeformedGoe => probe_block(&goe_block(draw)?, lambda, reps, rng),
        ModelKind::SpikedPopulation => {
            let data = draw
                .data
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("spiked draw carries no data matrix".into()))?;
            let rs = draw.spec.spikes.len();
            let n = draw.spec.n;
            let gt = data.rows(rs, draw.spec.dim() - rs).into_owned() / (n as f64).sqrt();
            let gram = GramResolvent::new(gt, lambda)?;
            let scale = 1.0 / (n as f64).sqrt();
            let mut l1s = Vec::with_capacity(reps);
            let mut l2s = Vec::with_capacity(reps);
            for _ in 0..reps {
                let f = gram.forms(&gaussian_vec(n, scale, rng))?;
                l1s.push(f.l1);
                l2s.push(f.l2);
            }
            Ok(summarize(lambda, n, gram.traces(), l1s, l2s))
        }
    }
}

/// Conditional tail bounds for `L₁ − tr R/m` on event B, as
/// `(lower tail, upper tail)` at deviation `t`, where `d = λ − λ₀`.
pub fn l1_concentration_bound(m: usize, d: f64, t: f64) -> (f64, f64) {
    let m = m as f64;
    let lower = (-0.25 * m * ((1.0 + 2.0 * d * t).sqrt() - 1.0).powi(2)).exp();
    let upper = (-0.25 * m * d * d * t * t).exp();
    (lower, upper)
}

/// Conditional tail bounds for `L₂ − tr R²/m` on event B, as
/// `(lower tail, upper tail)`.
pub fn l2_concentration_bound(m: usize, d: f64, t: f64) -> (f64, f64) {
    let m = m as f64;
    let lower = (-0.25 * m * d.powi(4) * t * t).exp();
    let upper = (-0.25 * m * ((1.0 + 2.0 * d * d * t).sqrt() - 1.0).powi(2)).exp();
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_deformed, sample_spiked, EnsembleSpec};
    use crate::linalg::eigenvalues;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn norm(x: &[f64]) -> f64 {
        dot(x, x).sqrt()
    }

    #[test]
    fn goe_construction_identities() {
        let spec = EnsembleSpec::deformed_goe(120, 1.0, vec![3.0, 2.0], 8).unwrap();
        let mut built = 0;
        for rep in 0..5 {
            let draw = sample_deformed(&spec, rep).unwrap();
            for i in 1..=2 {
                let rep = goe_approx_ev(&draw, i).unwrap();
                if !rep.event_b_ok {
                    continue;
                }
                let x = rep.x.as_ref().unwrap();
                assert!((norm(x) - 1.0).abs() < 1e-10);
                assert!(rep.identity_residual().unwrap() < 1e-8);
                let top = eigenvalues(&draw.matrix).unwrap()[0];
                assert!(rep.rayleigh.unwrap() <= top + 1e-8);
                built += 1;
            }
        }
        assert!(built >= 8);
    }

    #[test]
    fn goe_rejects_subcritical_and_bad_index() {
        let spec = EnsembleSpec::deformed_goe(30, 1.0, vec![2.0, 0.5], 1).unwrap();
        let draw = sample_deformed(&spec, 0).unwrap();
        assert!(matches!(goe_approx_ev(&draw, 2), Err(Error::Subcritical(_))));
        assert!(goe_approx_ev(&draw, 3).is_err());
        assert!(goe_approx_ev(&draw, 0).is_err());
    }

    #[test]
    fn spiked_construction_identities() {
        let spec = EnsembleSpec::spiked(300, 120, vec![6.0, 3.0], 3).unwrap();
        let mut built = 0;
        for rep in 0..3 {
            let draw = sample_spiked(&spec, rep).unwrap();
            for i in 1..=2 {
                let rep = spm_approx_ev(&draw, i).unwrap();
                if !rep.event_b_ok {
                    continue;
                }
                let x = rep.x.as_ref().unwrap();
                assert!((norm(x) - 1.0).abs() < 1e-10, "norm {}", norm(x));
                assert!(rep.identity_residual().unwrap() < 1e-8);
                assert!(rep.y_residual.unwrap() < 1e-8);
                let top = eigenvalues(&draw.matrix).unwrap()[0];
                assert!(rep.rayleigh.unwrap() <= top + 1e-8);
                built += 1;
            }
        }
        assert!(built >= 5);
    }

    #[test]
    fn spiked_smallest_construction() {
        let spec = EnsembleSpec::spiked(400, 101, vec![0.25], 5).unwrap();
        let draw = sample_spiked(&spec, 0).unwrap();
        let rep = spm_approx_ev_smallest(&draw, 1).unwrap();
        assert!(rep.event_b_ok);
        assert!((rep.l1_pred + 4.0).abs() < 1e-9);
        let x = rep.x.as_ref().unwrap();
        assert!((norm(x) - 1.0).abs() < 1e-10);
        assert!(rep.identity_residual().unwrap() < 1e-8);
        assert!(rep.y_residual.unwrap() < 1e-8);
        let bottom = *eigenvalues(&draw.matrix).unwrap().last().unwrap();
        assert!(rep.rayleigh.unwrap() >= bottom - 1e-8);
        assert!(rep.gap.unwrap().abs() < 0.1, "gap {}", rep.gap.unwrap());
    }

    #[test]
    fn gram_forms_match_dense_resolvent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gt = DMatrix::from_fn(4, 7, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = -0.7;
        let gram = GramResolvent::new(gt.clone(), lambda).unwrap();
        let v = gaussian_vec(7, 1.0, &mut rng);
        let f = gram.forms(&v).unwrap();
        let s = (gt.transpose() * &gt - DMatrix::identity(7, 7) * lambda)
            .try_inverse()
            .unwrap();
        let vv = DVector::from_column_slice(&v);
        let sv = &s * &vv;
        assert!((f.l1 - vv.dot(&sv)).abs() < 1e-10);
        assert!((f.l2 - sv.norm_squared()).abs() < 1e-10);
        let (t1, t2) = gram.traces();
        assert!((t1 - s.trace() / 7.0).abs() < 1e-10);
        assert!((t2 - (&s * &s).trace() / 7.0).abs() < 1e-10);
    }

    #[test]
    fn probe_on_zero_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zero = SymMatrix::zeros(50);
        let probe = probe_block(&zero, -1.0, 200, &mut rng).unwrap();
        assert_eq!(probe.tr_r_over_m, 1.0);
        for (l1, l2) in probe.l1_samples.iter().zip(&probe.l2_samples) {
            assert!((l1 - l2).abs() < 1e-12);
        }
        assert!((probe.mean_l1 - 1.0).abs() < 4.0 * probe.std_l1 / (200f64).sqrt());
    }

    #[test]
    fn concentration_bounds_at_zero() {
        assert_eq!(l1_concentration_bound(100, 0.5, 0.0), (1.0, 1.0));
        let (lo, hi) = l2_concentration_bound(100, 0.5, 1.0);
        assert!(lo < 1.0 && hi < 1.0);
    }
}
