use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wilson::{wilson_interval, WILSON_Z95};
use crate::ensembles::sample_goe;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, SymMatrix};
use crate::rng::{domain, SeedStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareRow {
    pub t: f64,
    /// `|a| t + ½ |a|_∞ t²`
    pub upper_threshold: f64,
    /// `−|a| t`
    pub lower_threshold: f64,
    pub emp_upper: f64,
    pub lo95_upper: f64,
    pub emp_lower: f64,
    pub lo95_lower: f64,
    /// `e^{−t²/4}`
    pub bound: f64,
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<ChiSquareRow>,
}

/// Empirical tails of `Σ a_i (X_i² − 1)` against `e^{−t²/4}` on both sides.
pub fn chi_square_tail_check(
    weights: &[f64],
    t_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<ChiSquareReport> {
    if weights.is_empty() || weights.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
        return Err(Error::Parameter("weights must be non-empty and positive".into()));
    }
    if t_grid.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
        return Err(Error::Parameter("t values must be >= 0".into()));
    }
    if replicates == 0 {
        return Err(Error::Parameter("replicates must be at least 1".into()));
    }
    let norm = weights.iter().map(|a| a * a).sum::<f64>().sqrt();
    let sup = weights.iter().copied().fold(0.0, f64::max);
    let streams = SeedStream::new(seed);
    let sums: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = streams.stream(domain::CHI_SQUARE, k);
            weights
                .iter()
                .map(|a| {
                    let x: f64 = rng.sample(StandardNormal);
                    a * (x * x - 1.0)
                })
                .sum()
        })
        .collect();
    let rows = t_grid
        .iter()
        .map(|&t| {
            let upper_threshold = norm * t + 0.5 * sup * t * t;
            let lower_threshold = -norm * t;
            let up = sums.iter().filter(|&&s| s >= upper_threshold).count();
            let down = sums.iter().filter(|&&s| s <= lower_threshold).count();
            let (lo_up, _) = wilson_interval(up, replicates, WILSON_Z95);
            let (lo_down, _) = wilson_interval(down, replicates, WILSON_Z95);
            let bound = (-t * t / 4.0).exp();
            ChiSquareRow {
                t,
                upper_threshold,
                lower_threshold,
                emp_upper: up as f64 / replicates as f64,
                lo95_upper: lo_up,
                emp_lower: down as f64 / replicates as f64,
                lo95_lower: lo_down,
                bound,
                dominated: lo_up <= bound && lo_down <= bound,
            }
        })
        .collect();
    Ok(ChiSquareReport {
        replicates,
        seed,
        rows,
    })
}

/// Largest violation of `λ_k(A) ≥ λ_k(A_{i₀}) ≥ λ_{k+1}(A)`, where `A_{i₀}`
/// is `A` with row and column `i₀` deleted. Zero when interlacing holds.
pub fn interlacing_violation(a: &SymMatrix, i0: usize) -> Result<f64> {
    let full = eigenvalues(a)?;
    let minor = eigenvalues(&a.delete_index(i0)?)?;
    let mut worst: f64 = 0.0;
    for (k, &mu) in minor.iter().enumerate() {
        worst = worst.max(mu - full[k]).max(full[k + 1] - mu);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingReport {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub failures: usize,
    pub max_violation: f64,
}

/// Samples `GOE(n, 1/n)` matrices, deletes a uniformly chosen index, and
/// counts replicates whose interlacing fails by more than `1e-8`.
pub fn interlacing_audit(replicates: usize, n: usize, seed: u64) -> Result<InterlacingReport> {
    if n < 2 {
        return Err(Error::Parameter(format!("interlacing needs n >= 2, got {n}")));
    }
    let streams = SeedStream::new(seed);
    let violations: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = streams.stream(domain::INTERLACING, k);
            let a = sample_goe(n, 1.0, &mut rng)?;
            let i0 = rng.random_range(0..n);
            interlacing_violation(&a, i0)
        })
        .collect::<Result<_>>()?;
    Ok(InterlacingReport {
        n,
        replicates,
        seed,
        failures: violations.iter().filter(|&&v| v > 1e-8).count(),
        max_violation: violations.iter().copied().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_at_zero_is_trivial() {
        let rep = chi_square_tail_check(&[1.0], &[0.0, 1.0, 2.0], 2000, 1).unwrap();
        assert_eq!(rep.rows[0].bound, 1.0);
        assert!(rep.rows.iter().all(|r| r.dominated));
        assert!(chi_square_tail_check(&[1.0, -1.0], &[1.0], 10, 1).is_err());
    }

    #[test]
    fn interlacing_small_cases() {
        let rep = interlacing_audit(50, 2, 3).unwrap();
        assert_eq!(rep.failures, 0);
        let diag = SymMatrix::from_diagonal(&[4.0, -1.0, 2.5, 0.0]);
        for i0 in 0..4 {
            assert_eq!(interlacing_violation(&diag, i0).unwrap(), 0.0);
        }
        assert!(interlacing_audit(10, 1, 0).is_err());
    }
}
