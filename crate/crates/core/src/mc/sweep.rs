use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quantile_sorted;
use crate::ensembles::{sample, EnsembleSpec, ModelKind};
use crate::error::{Error, Result};
use crate::limits::{lambda_theta, lambda_theta_c, EigenRank};
use crate::linalg::eigenvalues;

/// A fluctuation sweep over sample sizes. For the spiked model `p` grows
/// with `n` so that `(p − r − s)/n` stays at the base spec's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub spec: EnsembleSpec,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub rank: EigenRank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub center: f64,
    pub median_stat: f64,
    pub median_abs_dev: f64,
    pub q1_abs_dev: f64,
    pub q3_abs_dev: f64,
    pub iqr_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln(median |λ − center|)` on `ln n`.
    pub slope: f64,
    pub intercept: f64,
}

/// Spec at sample size `n`, keeping the unspiked aspect ratio of `base`.
fn spec_at(base: &EnsembleSpec, n: usize) -> Result<EnsembleSpec> {
    match base.model {
        ModelKind::DeformedGoe => EnsembleSpec::deformed_goe(n, base.sigma(), base.spikes.clone(), base.seed),
        ModelKind::SpikedPopulation => {
            let rs = base.spikes.len();
            let ratio = (base.dim() - rs) as f64 / base.n as f64;
            let p = rs + (ratio * n as f64).round() as usize;
            EnsembleSpec::spiked(n, p.max(1), base.spikes.clone(), base.seed)
        }
    }
}

/// Deterministic limit of the watched eigenvalue.
pub(crate) fn center_for(spec: &EnsembleSpec, rank: EigenRank) -> Result<f64> {
    let n = spec.n as f64;
    match (spec.model, rank) {
        (ModelKind::DeformedGoe, EigenRank::Top(i)) => match spec.spikes.get(i - 1) {
            Some(&theta) => Ok(lambda_theta(theta, spec.sigma())?.value),
            None => Ok(2.0 * spec.sigma()),
        },
        (ModelKind::DeformedGoe, EigenRank::Bottom(_)) => Err(Error::Parameter(
            "bottom eigenvalues of the deformed GOE have no tracked limit".into(),
        )),
        (ModelKind::SpikedPopulation, EigenRank::Top(i)) => {
            let r = spec.r();
            let c = (spec.dim() - r) as f64 / n;
            if i <= r {
                Ok(lambda_theta_c(spec.spikes[i - 1], c)?.value)
            } else {
                Ok((1.0 + c.sqrt()).powi(2))
            }
        }
        (ModelKind::SpikedPopulation, EigenRank::Bottom(i)) => {
            let (r, s) = (spec.r(), spec.s());
            let c = (spec.dim() - r - s) as f64 / n;
            if i <= s {
                Ok(lambda_theta_c(spec.spikes[r + s - i], c)?.value)
            } else {
                Ok((1.0 - c.sqrt()).powi(2))
            }
        }
    }
}

/// Medians and interquartile ranges of `|λ − center|` at each `n`, and the
/// fitted log-log slope of the median against `n`.
pub fn convergence_sweep(plan: &SweepPlan) -> Result<SweepReport> {
    if plan.replicates == 0 {
        return Err(Error::Parameter("replicates must be at least 1".into()));
    }
    if plan.n_list.is_empty() || plan.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("n_list must be non-empty and strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(plan.n_list.len());
    for &n in &plan.n_list {
        let spec = spec_at(&plan.spec, n)?;
        let center = center_for(&spec, plan.rank)?;
        let mut stats: Vec<f64> = (0..plan.replicates as u64)
            .into_par_iter()
            .map(|k| -> Result<f64> {
                let eigs = eigenvalues(&sample(&spec, k)?.matrix)?;
                let d = eigs.len();
                match plan.rank {
                    EigenRank::Top(i) if i <= d => Ok(eigs[i - 1]),
                    EigenRank::Bottom(i) if i <= d => Ok(eigs[d - i]),
                    _ => Err(Error::Parameter(format!("index out of range for dimension {d}"))),
                }
            })
            .collect::<Result<_>>()?;
        stats.sort_by(f64::total_cmp);
        let mut dev: Vec<f64> = stats.iter().map(|x| (x - center).abs()).collect();
        dev.sort_by(f64::total_cmp);
        let (q1, q3) = (quantile_sorted(&dev, 0.25), quantile_sorted(&dev, 0.75));
        rows.push(SweepRow {
            n,
            p: spec.p,
            center,
            median_stat: quantile_sorted(&stats, 0.5),
            median_abs_dev: quantile_sorted(&dev, 0.5),
            q1_abs_dev: q1,
            q3_abs_dev: q3,
            iqr_abs_dev: q3 - q1,
        });
    }
    let (slope, intercept) = loglog_fit(&rows);
    Ok(SweepReport {
        rows,
        slope,
        intercept,
    })
}

fn loglog_fit(rows: &[SweepRow]) -> (f64, f64) {
    if rows.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_abs_dev.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
