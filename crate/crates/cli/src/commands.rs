use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use spikelab::approxev::{goe_approx_ev, spm_approx_ev, spm_approx_ev_smallest};
use spikelab::ensembles::{sample, EnsembleSpec};
use spikelab::estimator::{estimate_all, heteroscedastic_normalize, invert_spike, parse_eigenvalues, SpikeEstimate};
use spikelab::limits::{lambda_theta, lambda_theta_c, mp_stieltjes, semicircle_stieltjes, BoundParams, Branch, EigenRank, Theorem};
use spikelab::linalg::{eigenvalues, Spectrum};
use spikelab::mc::{chi_square_tail_check, convergence_sweep, interlacing_audit, run_tail, ExperimentPlan, SweepPlan};
use spikelab::nets::{certify_coverage, net_ball, net_interval, NetKind};
use spikelab::rng::{domain, SeedStream};

use crate::output::{num, opt, Output, Table};
use crate::{
    ApproxEvArgs, Audit, CliError, EstimateArgs, LimitsArgs, Model, ModelArgs, NetArgs, SampleArgs, Side,
    SweepArgs, TheoremArg, VerifyArgs,
};

type CmdResult = Result<Output, CliError>;

fn param(msg: impl Into<String>) -> CliError {
    CliError::Parameter(msg.into())
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| param(format!("cannot read {}: {e}", path.display())))
}

fn theorem(t: TheoremArg) -> Theorem {
    match t {
        TheoremArg::T1i => Theorem::T1i,
        TheoremArg::T1ii => Theorem::T1ii,
        TheoremArg::T2i => Theorem::T2i,
        TheoremArg::T2ii => Theorem::T2ii,
        TheoremArg::T3i => Theorem::T3i,
        TheoremArg::T3ii => Theorem::T3ii,
    }
}

fn build_spec(model: Model, n: usize, p: Option<usize>, sigma: f64, spikes: &[f64], seed: u64) -> Result<EnsembleSpec, CliError> {
    Ok(match model {
        Model::Goe => EnsembleSpec::deformed_goe(n, sigma, spikes.to_vec(), seed)?,
        Model::Spiked => {
            let p = p.ok_or_else(|| param("--p is required for the spiked model"))?;
            EnsembleSpec::spiked(n, p, spikes.to_vec(), seed)?
        }
    })
}

fn spec_from(args: &ModelArgs, seed: u64) -> Result<EnsembleSpec, CliError> {
    build_spec(args.model, args.n, args.p, args.sigma, &args.spikes, seed)
}

pub fn sample_cmd(args: &SampleArgs, seed: u64) -> CmdResult {
    let spec = spec_from(&args.model, seed)?;
    let draw = sample(&spec, args.replicate)?;
    let eigs = eigenvalues(&draw.matrix)?;
    let mut table = Table::new(&["index", "eigenvalue"]);
    for (k, e) in eigs.iter().enumerate() {
        table.push(vec![(k + 1).to_string(), num(*e)]);
    }
    Ok(Output {
        params: to_value(args),
        seed: Some(seed),
        result: json!({
            "dim": eigs.len(),
            "trace": draw.matrix.trace(),
            "eigenvalues": eigs,
        }),
        table,
    })
}

pub fn limits(args: &LimitsArgs) -> CmdResult {
    let result = if let Some(th) = args.theorem {
        bound_result(args, theorem(th))?
    } else {
        match args.model {
            Model::Goe => {
                let theta = args.theta.ok_or_else(|| param("--theta is required"))?;
                let lim = lambda_theta(theta, args.sigma)?;
                let mut out = json!({
                    "model": "goe",
                    "theta": theta,
                    "sigma": args.sigma,
                    "lambda": lim.value,
                    "branch": lim.branch.as_str(),
                });
                if lim.branch == Branch::Supercritical {
                    let (g, gp) = semicircle_stieltjes(lim.value, args.sigma)?;
                    out["stieltjes"] = json!(g);
                    out["stieltjes_derivative"] = json!(gp);
                }
                out
            }
            Model::Spiked => {
                let theta_sq = args.theta_sq.ok_or_else(|| param("--theta-sq is required"))?;
                let c = args.c.ok_or_else(|| param("--c is required"))?;
                let lim = lambda_theta_c(theta_sq, c)?;
                let mut out = json!({
                    "model": "spiked",
                    "theta_sq": theta_sq,
                    "c": c,
                    "lambda": lim.value,
                    "branch": lim.branch.as_str(),
                });
                if matches!(lim.branch, Branch::Supercritical | Branch::SubcriticalLow) {
                    let (g, gp) = mp_stieltjes(lim.value, c)?;
                    out["stieltjes"] = json!(g);
                    out["stieltjes_derivative"] = json!(gp);
                }
                out
            }
        }
    };
    Ok(Output {
        params: to_value(args),
        seed: None,
        table: Table::from_object(&result),
        result,
    })
}

fn bound_result(args: &LimitsArgs, theorem: Theorem) -> Result<Value, CliError> {
    let n = args.n.ok_or_else(|| param("--n is required with --theorem"))?;
    let t = args.t.ok_or_else(|| param("--t is required with --theorem"))?;
    let p = if theorem.is_goe() {
        0
    } else {
        args.p.ok_or_else(|| param("--p is required for this theorem"))?
    };
    let mut params = BoundParams::new(theorem, n, p, args.i, t, args.spikes.clone())
        .with_sigma(args.sigma)
        .with_delta(args.delta);
    params.c2 = args.c2;
    params.c3 = args.c3;
    let rhs = params.bound_rhs()?;
    let event = params.event()?;
    let (rank, index) = match event.rank {
        EigenRank::Top(i) => ("top", i),
        EigenRank::Bottom(i) => ("bottom", i),
    };
    Ok(json!({
        "theorem": theorem.as_str(),
        "t": t,
        "t_floor": params.t_floor()?,
        "bound_rhs": rhs,
        "rank": rank,
        "eigen_index": index,
        "sqrt_scale": event.sqrt,
        "upper_tail": event.upper,
        "threshold": event.threshold,
        "center": event.center,
    }))
}

pub fn net(args: &NetArgs, seed: u64) -> CmdResult {
    let streams = SeedStream::new(seed);
    let net = if args.m == 1 {
        net_interval(args.epsilon)?
    } else {
        net_ball(args.m, args.epsilon, &mut streams.stream(domain::NET_SPHERE, 0))?
    };
    let coverage = certify_coverage(&net, args.samples, &mut streams.stream(domain::COVERAGE, 0))?;
    if !coverage.passed {
        return Err(CliError::Internal(format!(
            "net failed its coverage check: sampled distance {} exceeds epsilon {}",
            coverage.max_distance, args.epsilon
        )));
    }
    let mut columns: Vec<String> = vec!["index".into()];
    columns.extend((1..=args.m).map(|k| format!("x{k}")));
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for (k, point) in net.points.iter().enumerate() {
        let mut row = vec![(k + 1).to_string()];
        row.extend(point.coords.iter().map(|&x| num(x)));
        table.push(row);
    }
    let points: Vec<&[f64]> = net.points.iter().map(|p| p.coords.as_slice()).collect();
    let result = json!({
        "kind": match net.kind { NetKind::Interval => "interval", NetKind::Ball => "ball" },
        "m": net.m,
        "epsilon": net.epsilon,
        "size": net.len(),
        "bound": net.certified_size_bound,
        "coverage": coverage,
        "points": points,
    });
    Ok(Output {
        params: to_value(args),
        seed: Some(seed),
        result,
        table,
    })
}

pub fn approx_ev(args: &ApproxEvArgs, seed: u64) -> CmdResult {
    let spec = spec_from(&args.model, seed)?;
    let draw = sample(&spec, args.replicate)?;
    let report = match (args.model.model, args.smallest) {
        (Model::Goe, true) => return Err(param("--smallest applies to the spiked model only")),
        (Model::Goe, false) => goe_approx_ev(&draw, args.i)?,
        (Model::Spiked, false) => spm_approx_ev(&draw, args.i)?,
        (Model::Spiked, true) => spm_approx_ev_smallest(&draw, args.i)?,
    };
    let mut result = to_value(&report);
    result["identity_residual"] = json!(report.identity_residual());
    let mut summary = result.clone();
    if let Value::Object(map) = &mut summary {
        map.remove("x");
    }
    if !args.vector {
        result = summary.clone();
    }
    Ok(Output {
        params: to_value(args),
        seed: Some(seed),
        table: Table::from_object(&summary),
        result,
    })
}

fn estimate_table(estimates: &[SpikeEstimate]) -> Table {
    let mut table = Table::new(&["rank", "lambda_obs", "c", "theta_sq_hat", "side"]);
    for e in estimates {
        table.push(vec![
            e.rank.map(|r| r.to_string()).unwrap_or_default(),
            num(e.lambda_obs),
            num(e.c),
            opt(e.theta_sq_hat),
            e.side.as_str().to_string(),
        ]);
    }
    table
}

fn estimate_value(e: &SpikeEstimate) -> Value {
    json!({
        "rank": e.rank,
        "lambda_obs": e.lambda_obs,
        "c": e.c,
        "theta_sq_hat": e.theta_sq_hat,
        "detectable": e.detectable,
        "side": e.side.as_str(),
    })
}

pub fn estimate(args: &EstimateArgs) -> CmdResult {
    let (estimates, noise) = match (&args.input, args.lambda) {
        (Some(_), Some(_)) => return Err(param("give either --lambda or --input, not both")),
        (None, None) => return Err(param("one of --lambda or --input is required")),
        (None, Some(lambda)) => {
            let c = args.c.ok_or_else(|| param("--c is required with --lambda"))?;
            (vec![invert_spike(lambda, c)?], None)
        }
        (Some(path), None) => {
            let eigs = parse_eigenvalues(&read_text(path)?)?;
            let n = args.n.ok_or_else(|| param("--n is required with --input"))?;
            if n == 0 {
                return Err(param("--n must be at least 1"));
            }
            match args.normalize {
                None => (estimate_all(&Spectrum { eigenvalues: eigs, eigenvectors: None }, n, args.r_max)?, None),
                Some(r) => {
                    let c = eigs.len() as f64 / n as f64;
                    let (sigma_sq, rescaled) = heteroscedastic_normalize(&eigs, r)?;
                    let est = rescaled
                        .iter()
                        .enumerate()
                        .map(|(k, &x)| {
                            let mut e = invert_spike(x, c)?;
                            e.rank = Some(k + 1);
                            Ok(e)
                        })
                        .collect::<spikelab::error::Result<Vec<_>>>()?;
                    (est, Some(sigma_sq))
                }
            }
        }
    };
    let mut result = json!({
        "estimates": estimates.iter().map(estimate_value).collect::<Vec<_>>(),
    });
    if let Some(s) = noise {
        result["sigma_hat_sq"] = json!(s);
    }
    Ok(Output {
        params: to_value(args),
        seed: None,
        table: estimate_table(&estimates),
        result,
    })
}

pub fn verify(args: &VerifyArgs, seed: Option<u64>) -> CmdResult {
    if let Some(audit) = args.audit {
        return run_audit(args, audit, seed.unwrap_or(0));
    }
    let plan = match &args.plan {
        Some(path) => {
            let mut plan = ExperimentPlan::from_json(&read_text(path)?)?;
            if let Some(s) = seed {
                plan.spec.seed = s;
            }
            plan
        }
        None => {
            let model = args.model.ok_or_else(|| param("--model is required without --plan"))?;
            let n = args.n.ok_or_else(|| param("--n is required without --plan"))?;
            let th = args.theorem.ok_or_else(|| param("--theorem is required without --plan"))?;
            let spec = build_spec(model, n, args.p, args.sigma, &args.spikes, seed.unwrap_or(0))?;
            let mut plan = ExperimentPlan::new(spec, theorem(th), args.i, args.t_grid.clone(), args.replicates)
                .with_delta(args.delta);
            plan.c2 = args.c2;
            plan.c3 = args.c3;
            plan
        }
    };
    let report = run_tail(&plan)?;
    let violations = report.violations(1.0).len();
    let mut table = Table::new(&["t", "threshold", "hits", "emp", "lo95", "hi95", "bound", "dominated", "vacuous"]);
    for r in &report.rows {
        table.push(vec![
            num(r.t),
            num(r.threshold),
            r.hits.to_string(),
            num(r.empirical_prob),
            num(r.lo95),
            num(r.hi95),
            num(r.bound_rhs),
            r.dominated.to_string(),
            r.vacuous.to_string(),
        ]);
    }
    let mut result = to_value(&report);
    result["violations"] = json!(violations);
    Ok(Output {
        params: json!({ "plan": to_value(&plan) }),
        seed: Some(plan.spec.seed),
        result,
        table,
    })
}

fn run_audit(args: &VerifyArgs, audit: Audit, seed: u64) -> CmdResult {
    match audit {
        Audit::ChiSquare => {
            let weights = if args.weights.is_empty() { vec![1.0] } else { args.weights.clone() };
            let t_grid = if args.t_grid.is_empty() { vec![0.5, 1.0, 2.0, 3.0] } else { args.t_grid.clone() };
            let report = chi_square_tail_check(&weights, &t_grid, args.replicates, seed)?;
            let mut table = Table::new(&["t", "emp_upper", "lo95_upper", "emp_lower", "lo95_lower", "bound", "dominated"]);
            for r in &report.rows {
                table.push(vec![
                    num(r.t),
                    num(r.emp_upper),
                    num(r.lo95_upper),
                    num(r.emp_lower),
                    num(r.lo95_lower),
                    num(r.bound),
                    r.dominated.to_string(),
                ]);
            }
            Ok(Output {
                params: json!({ "audit": "chi-square", "weights": weights, "t_grid": t_grid, "replicates": args.replicates }),
                seed: Some(seed),
                result: to_value(&report),
                table,
            })
        }
        Audit::Interlacing => {
            let n = args.n.unwrap_or(50);
            let report = interlacing_audit(args.replicates, n, seed)?;
            let result = to_value(&report);
            Ok(Output {
                params: json!({ "audit": "interlacing", "n": n, "replicates": args.replicates }),
                seed: Some(seed),
                table: Table::from_object(&result),
                result,
            })
        }
    }
}

pub fn sweep(args: &SweepArgs, seed: Option<u64>) -> CmdResult {
    let plan = match &args.plan {
        Some(path) => {
            let mut plan: SweepPlan = serde_json::from_str(&read_text(path)?)
                .map_err(|e| param(format!("cannot parse sweep plan: {e}")))?;
            if let Some(s) = seed {
                plan.spec.seed = s;
            }
            plan
        }
        None => {
            let base_n = *args.n_list.first().ok_or_else(|| param("--n-list is required without --plan"))?;
            let spec = build_spec(args.model, base_n, args.p, args.sigma, &args.spikes, seed.unwrap_or(0))?;
            let rank = match args.side {
                Side::Top => EigenRank::Top(args.i),
                Side::Bottom => EigenRank::Bottom(args.i),
            };
            SweepPlan {
                spec,
                n_list: args.n_list.clone(),
                replicates: args.replicates,
                rank,
            }
        }
    };
    if matches!(plan.rank, EigenRank::Top(0) | EigenRank::Bottom(0)) {
        return Err(param("eigenvalue index must be at least 1"));
    }
    let report = convergence_sweep(&plan)?;
    let mut table = Table::new(&["n", "p", "center", "median_stat", "median_abs_dev", "q1_abs_dev", "q3_abs_dev"]);
    for r in &report.rows {
        table.push(vec![
            r.n.to_string(),
            r.p.map(|p| p.to_string()).unwrap_or_default(),
            num(r.center),
            num(r.median_stat),
            num(r.median_abs_dev),
            num(r.q1_abs_dev),
            num(r.q3_abs_dev),
        ]);
    }
    Ok(Output {
        params: json!({ "plan": to_value(&plan) }),
        seed: Some(plan.spec.seed),
        result: to_value(&report),
        table,
    })
}
