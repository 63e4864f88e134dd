//! Seeded sampling of the deformed GOE and the spiked population model.
//!
//! Both models are sampled in their diagonal canonical form: the deformation
//! is `P = diag(θ_1, …, θ_r, 0, …)` and the population covariance is
//! `Σ = diag(θ_1², …, θ_{r+s}², 1, …)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::rng::{domain, SeedStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DeformedGoe,
    SpikedPopulation,
}

/// A random matrix model together with its dimensions and master seed.
///
/// For `DeformedGoe`, `spikes` are the eigenvalues θ_i of `P` and `sigma` is
/// the noise scale. For `SpikedPopulation`, `spikes` are the population
/// eigenvalues θ_i² and `p` is the row dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub spikes: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn deformed_goe(n: usize, sigma: f64, spikes: Vec<f64>, seed: u64) -> Result<Self> {
        let spec = Self {
            model: ModelKind::DeformedGoe,
            n,
            p: None,
            sigma: Some(sigma),
            spikes,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn spiked(n: usize, p: usize, spikes: Vec<f64>, seed: u64) -> Result<Self> {
        let spec = Self {
            model: ModelKind::SpikedPopulation,
            n,
            p: Some(p),
            sigma: None,
            spikes,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Dimension("n must be at least 1".into()));
        }
        if self.spikes.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Parameter(format!(
                "spikes must be finite and strictly positive, got {:?}",
                self.spikes
            )));
        }
        if self.spikes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parameter(format!(
                "spikes must be non-increasing, got {:?}",
                self.spikes
            )));
        }
        match self.model {
            ModelKind::DeformedGoe => {
                let sigma = self.sigma.ok_or_else(|| {
                    Error::Parameter("deformed GOE requires sigma".into())
                })?;
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
                }
                if self.spikes.len() > self.n {
                    return Err(Error::Dimension(format!(
                        "rank r = {} exceeds n = {}",
                        self.spikes.len(),
                        self.n
                    )));
                }
            }
            ModelKind::SpikedPopulation => {
                let p = self
                    .p
                    .ok_or_else(|| Error::Parameter("spiked model requires p".into()))?;
                if p == 0 {
                    return Err(Error::Dimension("p must be at least 1".into()));
                }
                if self.spikes.len() > p {
                    return Err(Error::Dimension(format!(
                        "r + s = {} exceeds p = {p}",
                        self.spikes.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(1.0)
    }

    /// Row dimension of the sampled matrix: `n` for the GOE, `p` for `S_n`.
    pub fn dim(&self) -> usize {
        match self.model {
            ModelKind::DeformedGoe => self.n,
            ModelKind::SpikedPopulation => self.p.unwrap_or(0),
        }
    }

    /// Number of spikes above one (spiked model) or the rank of `P`.
    pub fn r(&self) -> usize {
        match self.model {
            ModelKind::DeformedGoe => self.spikes.len(),
            ModelKind::SpikedPopulation => self.spikes.iter().filter(|&&x| x > 1.0).count(),
        }
    }

    /// Number of spikes below one; always zero for the GOE.
    pub fn s(&self) -> usize {
        match self.model {
            ModelKind::DeformedGoe => 0,
            ModelKind::SpikedPopulation => self.spikes.iter().filter(|&&x| x < 1.0).count(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// One sampled matrix. For the spiked model `data` holds the `p × n`
/// matrix `Σ^{1/2} G`, from which `matrix = data · dataᵀ / n`.
#[derive(Debug, Clone)]
pub struct SampleDraw {
    pub matrix: SymMatrix,
    pub replicate: u64,
    pub spec: EnsembleSpec,
    pub data: Option<DMatrix<f64>>,
}

/// A `GOE(n, σ²/n)` matrix: independent upper-triangle Gaussians with
/// diagonal variance `2σ²/n` and off-diagonal variance `σ²/n`.
pub fn sample_goe<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Result<SymMatrix> {
    if n == 0 {
        return Err(Error::Dimension("n must be at least 1".into()));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
    }
    let off = sigma / (n as f64).sqrt();
    let diag = off * std::f64::consts::SQRT_2;
    Ok(SymMatrix::from_upper_fn(n, |i, j| {
        let z: f64 = rng.sample(StandardNormal);
        if i == j {
            diag * z
        } else {
            off * z
        }
    }))
}

/// `A = P + G` for replicate `replicate` of a deformed GOE spec.
pub fn sample_deformed(spec: &EnsembleSpec, replicate: u64) -> Result<SampleDraw> {
    if spec.model != ModelKind::DeformedGoe {
        return Err(Error::Parameter("sample_deformed needs a DeformedGoe spec".into()));
    }
    spec.validate()?;
    let mut rng = SeedStream::new(spec.seed).stream(domain::DEFORMED_GOE, replicate);
    let mut a = sample_goe(spec.n, spec.sigma(), &mut rng)?;
    for (k, &theta) in spec.spikes.iter().enumerate() {
        a.set(k, k, a.get(k, k) + theta);
    }
    Ok(SampleDraw {
        matrix: a,
        replicate,
        spec: spec.clone(),
        data: None,
    })
}

/// `S_n = (Σ^{1/2}G)(Σ^{1/2}G)ᵀ / n` for replicate `replicate` of a spiked spec.
pub fn sample_spiked(spec: &EnsembleSpec, replicate: u64) -> Result<SampleDraw> {
    if spec.model != ModelKind::SpikedPopulation {
        return Err(Error::Parameter("sample_spiked needs a SpikedPopulation spec".into()));
    }
    spec.validate()?;
    let p = spec.dim();
    let n = spec.n;
    let mut rng = SeedStream::new(spec.seed).stream(domain::SPIKED, replicate);
    let mut data = DMatrix::<f64>::from_fn(p, n, |_, _| rng.sample(StandardNormal));
    for (k, &theta_sq) in spec.spikes.iter().enumerate() {
        let scale = theta_sq.sqrt();
        data.row_mut(k).scale_mut(scale);
    }
    let gram = (&data * data.transpose()) / n as f64;
    let matrix = SymMatrix::symmetrize(&gram)?;
    Ok(SampleDraw {
        matrix,
        replicate,
        spec: spec.clone(),
        data: Some(data),
    })
}

/// Dispatches on the spec's model.
pub fn sample(spec: &EnsembleSpec, replicate: u64) -> Result<SampleDraw> {
    match spec.model {
        ModelKind::DeformedGoe => sample_deformed(spec, replicate),
        ModelKind::SpikedPopulation => sample_spiked(spec, replicate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn goe_entry_variances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut single = Vec::with_capacity(draws);
        let mut off = Vec::with_capacity(draws);
        let mut diag = Vec::with_capacity(draws);
        for _ in 0..draws {
            single.push(sample_goe(1, 1.5, &mut rng).unwrap().get(0, 0));
            let g = sample_goe(4, 1.0, &mut rng).unwrap();
            off.push(g.get(0, 3));
            diag.push(g.get(2, 2));
        }
        // n = 1: variance 2σ².
        let (m1, v1) = mean_var(&single);
        assert!(m1.abs() < 4.0 * (4.5f64 / draws as f64).sqrt());
        assert!((v1 - 4.5).abs() < 4.0 * 4.5 * (2.0 / draws as f64).sqrt());
        let (_, v_off) = mean_var(&off);
        assert!((v_off - 0.25).abs() < 0.01, "off-diagonal variance {v_off}");
        let (_, v_diag) = mean_var(&diag);
        assert!((v_diag - 0.5).abs() < 0.02, "diagonal variance {v_diag}");
    }

    #[test]
    fn deformed_draws_are_deterministic_per_replicate() {
        let spec = EnsembleSpec::deformed_goe(6, 1.0, vec![2.0], 77).unwrap();
        let a = sample_deformed(&spec, 0).unwrap();
        let b = sample_deformed(&spec, 0).unwrap();
        let c = sample_deformed(&spec, 1).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_ne!(a.matrix, c.matrix);
        // Drawing replicate 1 first must not change replicate 0.
        let spec2 = spec.clone();
        let _ = sample_deformed(&spec2, 5).unwrap();
        assert_eq!(sample_deformed(&spec2, 0).unwrap().matrix, a.matrix);
    }

    #[test]
    fn empty_deformation_is_pure_goe() {
        let spec = EnsembleSpec::deformed_goe(5, 1.0, vec![], 3).unwrap();
        let draw = sample_deformed(&spec, 0).unwrap();
        let mut rng = SeedStream::new(3).stream(domain::DEFORMED_GOE, 0);
        assert_eq!(draw.matrix, sample_goe(5, 1.0, &mut rng).unwrap());
    }

    #[test]
    fn deformed_mean_of_spiked_entry() {
        let spec = EnsembleSpec::deformed_goe(4, 1.0, vec![2.0], 5).unwrap();
        let xs: Vec<f64> = (0..10_000)
            .map(|k| sample_deformed(&spec, k).unwrap().matrix.get(0, 0))
            .collect();
        let (m, _) = mean_var(&xs);
        assert!((m - 2.0).abs() < 0.05, "mean {m}");
    }

    #[test]
    fn spiked_diagonal_means() {
        let spec = EnsembleSpec::spiked(10, 3, vec![4.0], 9).unwrap();
        let mut s11 = Vec::new();
        let mut s33 = Vec::new();
        for k in 0..10_000 {
            let d = sample_spiked(&spec, k).unwrap();
            s11.push(d.matrix.get(0, 0));
            s33.push(d.matrix.get(2, 2));
        }
        let (m11, _) = mean_var(&s11);
        let (m33, _) = mean_var(&s33);
        assert!((m11 - 4.0).abs() < 0.1, "E[S11] = {m11}");
        assert!((m33 - 1.0).abs() < 0.05, "E[S33] = {m33}");

        let null = EnsembleSpec::spiked(200, 4, vec![], 1).unwrap();
        let mean_diag: f64 = (0..200)
            .map(|k| sample_spiked(&null, k).unwrap().matrix.trace() / 4.0)
            .sum::<f64>()
            / 200.0;
        assert!((mean_diag - 1.0).abs() < 0.05);
    }

    #[test]
    fn spiked_matrix_is_psd() {
        let spec = EnsembleSpec::spiked(5, 12, vec![3.0, 0.5], 2).unwrap();
        let d = sample_spiked(&spec, 0).unwrap();
        assert_eq!(d.matrix.dim(), 12);
        assert!(eigenvalues(&d.matrix).unwrap().iter().all(|&x| x >= -1e-10));
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            EnsembleSpec::deformed_goe(2, 1.0, vec![3.0, 2.0, 1.0], 0),
            Err(Error::Dimension(_))
        ));
        assert!(EnsembleSpec::deformed_goe(5, 0.0, vec![], 0).is_err());
        assert!(EnsembleSpec::deformed_goe(5, 1.0, vec![1.0, 2.0], 0).is_err());
        assert!(EnsembleSpec::spiked(5, 1, vec![4.0, 0.5], 0).is_err());
        assert!(EnsembleSpec::spiked(5, 3, vec![-1.0], 0).is_err());
        // θ² = 1 is allowed by the sampler.
        assert!(EnsembleSpec::spiked(5, 3, vec![1.0], 0).is_ok());
        let spec = EnsembleSpec::spiked(5, 3, vec![4.0], 0).unwrap();
        assert!(sample_deformed(&spec, 0).is_err());
    }
}
