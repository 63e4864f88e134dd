use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fmt_sig;
use super::wilson::{wilson_interval, WILSON_Z95};
use crate::approxev::goe_block;
use crate::ensembles::{sample, EnsembleSpec, ModelKind, SampleDraw};
use crate::error::{Error, Result};
use crate::limits::{lambda_theta, lambda_theta_c, BoundParams, EigenRank, TailEvent, Theorem};
use crate::linalg::{eigenvalues, SymMatrix};

/// One tail experiment: a model, the eigenvalue to watch, the bound to
/// compare against, and a grid of deviations `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub spec: EnsembleSpec,
    pub theorem: Theorem,
    /// 1-based index `i` of `λ_i` (or of `λ_{p−i+1}` for the bottom tails).
    pub eigen_index: usize,
    pub t_grid: Vec<f64>,
    pub replicates: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
}

fn default_delta() -> f64 {
    0.25
}
fn default_c1() -> f64 {
    crate::limits::DEFAULT_C1
}

impl ExperimentPlan {
    pub fn new(spec: EnsembleSpec, theorem: Theorem, eigen_index: usize, t_grid: Vec<f64>, replicates: usize) -> Self {
        Self {
            name: None,
            spec,
            theorem,
            eigen_index,
            t_grid,
            replicates,
            delta: default_delta(),
            c1: default_c1(),
            c2: None,
            c3: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Plan(format!("cannot parse plan: {e}")))
    }

    pub fn bound_params(&self, t: f64) -> BoundParams {
        BoundParams {
            theorem: self.theorem,
            n: self.spec.n,
            p: self.spec.p.unwrap_or(0),
            i: self.eigen_index,
            sigma: self.spec.sigma(),
            t,
            delta: self.delta,
            spikes: self.spec.spikes.clone(),
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let plan_err = |e: Error| Error::Plan(e.to_string());
        self.spec.validate().map_err(plan_err)?;
        let goe = self.spec.model == ModelKind::DeformedGoe;
        if goe != self.theorem.is_goe() {
            return Err(Error::Plan(format!(
                "theorem {} does not apply to the {:?} model",
                self.theorem.as_str(),
                self.spec.model
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Plan("replicates must be at least 1".into()));
        }
        if self.t_grid.is_empty() {
            return Err(Error::Plan("t_grid is empty".into()));
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Plan("t_grid must be strictly ascending".into()));
        }
        for &t in &self.t_grid {
            self.bound_params(t).bound_rhs().map_err(plan_err)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Event threshold on the scale of the watched statistic.
    pub threshold: f64,
    pub hits: usize,
    pub empirical_prob: f64,
    pub lo95: f64,
    pub hi95: f64,
    pub wilson_halfwidth_95: f64,
    pub bound_rhs: f64,
    /// The lower 95% limit does not exceed the bound.
    pub dominated: bool,
    /// The bound is at least one and says nothing.
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub theorem: Theorem,
    pub eigen_index: usize,
    pub seed: u64,
    /// `λ_θ` or `λ_{θ,c}` on the eigenvalue scale.
    pub center: f64,
    pub sqrt_scale: bool,
    pub upper_tail: bool,
    pub replicates_requested: usize,
    pub replicates_used: usize,
    pub excluded_b_failures: usize,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    /// Rows whose bound is informative (below `cutoff`) but not dominated.
    pub fn violations(&self, cutoff: f64) -> Vec<&TailRow> {
        self.rows
            .iter()
            .filter(|r| r.bound_rhs < cutoff && !r.dominated)
            .collect()
    }

    /// CSV with columns `t, emp, lo95, hi95, bound, dominated`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,emp,lo95,hi95,bound,dominated\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_sig(r.t),
                fmt_sig(r.empirical_prob),
                fmt_sig(r.lo95),
                fmt_sig(r.hi95),
                fmt_sig(r.bound_rhs),
                r.dominated
            ));
        }
        out
    }
}

fn stat_index(rank: EigenRank, dim: usize) -> Result<usize> {
    match rank {
        EigenRank::Top(i) if i >= 1 && i <= dim => Ok(i - 1),
        EigenRank::Bottom(i) if i >= 1 && i <= dim => Ok(dim - i),
        _ => Err(Error::Plan(format!("eigen index {rank:?} out of range for dimension {dim}"))),
    }
}

/// The unspiked `q × n` block of a spiked draw, scaled by `1/√n`, as the
/// eigenvalues of its `q × q` Gram matrix.
fn spiked_block_eigs(draw: &SampleDraw) -> Result<Vec<f64>> {
    let data = draw
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("spiked draw carries no data matrix".into()))?;
    let rs = draw.spec.spikes.len();
    let q = draw.spec.dim() - rs;
    let block = data.rows(rs, q);
    let gram = (&block * block.transpose()) / draw.spec.n as f64;
    eigenvalues(&SymMatrix::symmetrize(&gram)?)
}

/// Whether the truncation event B of the lower-tail statements holds.
fn truncation_event(plan: &ExperimentPlan, draw: &SampleDraw) -> Result<bool> {
    let spec = &plan.spec;
    let i = plan.eigen_index;
    let n = spec.n as f64;
    match plan.theorem {
        Theorem::T1ii => {
            let sigma = spec.sigma();
            let lam = lambda_theta(spec.spikes[i - 1], sigma)?.value;
            let lambda0 = 0.5 * (2.0 * sigma + lam);
            let top = eigenvalues(&goe_block(draw)?)?[0];
            Ok(top <= lambda0)
        }
        Theorem::T2ii => {
            let c = (spec.dim() - spec.r()) as f64 / n;
            let lam = lambda_theta_c(spec.spikes[i - 1], c)?.value;
            let lambda0 = 0.5 * ((1.0 + c.sqrt()).powi(2) + lam);
            Ok(spiked_block_eigs(draw)?[0] <= lambda0)
        }
        Theorem::T3ii => {
            let c = (spec.dim() - spec.spikes.len()) as f64 / n;
            let theta_sq = spec.spikes[spec.spikes.len() - i];
            let lam = lambda_theta_c(theta_sq, c)?.value;
            let lambda0 = 0.5 * ((1.0 - c.sqrt()).powi(2) + lam);
            let eigs = spiked_block_eigs(draw)?;
            Ok(*eigs.last().unwrap() >= lambda0)
        }
        _ => Ok(true),
    }
}

/// Runs the plan's replicates and tabulates, for each `t`, the frequency of
/// the bound's event against the bound. Replicates where the truncation
/// event B fails are excluded from the lower-tail statements and counted.
pub fn run_tail(plan: &ExperimentPlan) -> Result<TailReport> {
    plan.validate()?;
    let events: Vec<TailEvent> = plan
        .t_grid
        .iter()
        .map(|&t| plan.bound_params(t).event())
        .collect::<Result<_>>()?;
    let bounds: Vec<f64> = plan
        .t_grid
        .iter()
        .map(|&t| plan.bound_params(t).bound_rhs())
        .collect::<Result<_>>()?;
    let rank = events[0].rank;
    let needs_b = plan.theorem.is_reverse();

    let stats: Vec<Option<f64>> = (0..plan.replicates as u64)
        .into_par_iter()
        .map(|k| -> Result<Option<f64>> {
            let draw = sample(&plan.spec, k)?;
            if needs_b && !truncation_event(plan, &draw)? {
                return Ok(None);
            }
            let eigs = eigenvalues(&draw.matrix)?;
            Ok(Some(eigs[stat_index(rank, eigs.len())?]))
        })
        .collect::<Result<_>>()?;

    let used: Vec<f64> = stats.iter().flatten().copied().collect();
    let excluded = stats.len() - used.len();
    let rows = plan
        .t_grid
        .iter()
        .zip(&events)
        .zip(&bounds)
        .map(|((&t, ev), &bound)| {
            let hits = used.iter().filter(|&&x| ev.holds(x)).count();
            let (lo, hi) = wilson_interval(hits, used.len(), WILSON_Z95);
            TailRow {
                t,
                threshold: ev.threshold,
                hits,
                empirical_prob: if used.is_empty() {
                    f64::NAN
                } else {
                    hits as f64 / used.len() as f64
                },
                lo95: lo,
                hi95: hi,
                wilson_halfwidth_95: 0.5 * (hi - lo),
                bound_rhs: bound,
                dominated: lo <= bound,
                vacuous: bound >= 1.0,
            }
        })
        .collect();

    Ok(TailReport {
        name: plan.name.clone(),
        theorem: plan.theorem,
        eigen_index: plan.eigen_index,
        seed: plan.spec.seed,
        center: events[0].center,
        sqrt_scale: events[0].sqrt,
        upper_tail: events[0].upper,
        replicates_requested: plan.replicates,
        replicates_used: used.len(),
        excluded_b_failures: excluded,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_goe_at_zero_is_trivially_dominated() {
        let spec = EnsembleSpec::deformed_goe(40, 1.0, vec![], 3).unwrap();
        let plan = ExperimentPlan::new(spec, Theorem::T1i, 1, vec![0.0, 0.5], 200);
        let report = run_tail(&plan).unwrap();
        assert_eq!(report.rows[0].bound_rhs, 1.0);
        assert!(report.rows[0].vacuous && report.rows[0].dominated);
        assert!(report.rows.iter().all(|r| r.dominated));
        assert_eq!(report.replicates_used, 200);
        assert!(report.to_csv().starts_with("t,emp,lo95,hi95,bound,dominated\n"));
    }

    #[test]
    fn reverse_statement_counts_exclusions() {
        let spec = EnsembleSpec::deformed_goe(30, 1.0, vec![2.0], 4).unwrap();
        let plan = ExperimentPlan::new(spec, Theorem::T1ii, 1, vec![0.0, 1.0], 100);
        let report = run_tail(&plan).unwrap();
        assert_eq!(report.replicates_used + report.excluded_b_failures, 100);
        assert!(!report.upper_tail);
    }

    #[test]
    fn plan_errors() {
        let spec = EnsembleSpec::deformed_goe(30, 1.0, vec![2.0], 4).unwrap();
        let plan = ExperimentPlan::new(spec.clone(), Theorem::T2i, 1, vec![0.5], 10);
        assert!(matches!(run_tail(&plan), Err(Error::Plan(_))));
        let plan = ExperimentPlan::new(spec.clone(), Theorem::T1i, 1, vec![1.0, 0.5], 10);
        assert!(matches!(run_tail(&plan), Err(Error::Plan(_))));
        let plan = ExperimentPlan::new(spec, Theorem::T1i, 1, vec![0.01], 10);
        assert!(matches!(run_tail(&plan), Err(Error::Plan(_))));
        assert!(ExperimentPlan::from_json("{").is_err());
    }

    #[test]
    fn plan_json_round_trip() {
        let spec = EnsembleSpec::spiked(50, 10, vec![4.0], 9).unwrap();
        let plan = ExperimentPlan::new(spec, Theorem::T2i, 1, vec![0.5, 1.0], 5).with_delta(0.3);
        let text = serde_json::to_string(&plan).unwrap();
        assert_eq!(ExperimentPlan::from_json(&text).unwrap(), plan);
    }
}
