//! Python bindings. Reports come back as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use slcore::ensembles::{sample as draw_sample, EnsembleSpec as CoreSpec, ModelKind};
use slcore::error::Error;
use slcore::limits::{self, BoundParams, Theorem};
use slcore::linalg::{eigenvalues as core_eigenvalues, SymMatrix};
use slcore::mc::{self, ExperimentPlan, SweepPlan};
use slcore::rng::{domain, SeedStream};
use slcore::{approxev, estimator, nets};

fn err(e: Error) -> PyErr {
    if e.is_parameter_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

fn parse_theorem(name: &str) -> PyResult<Theorem> {
    name.parse().map_err(err)
}

/// A deformed GOE or spiked population model with its master seed.
#[pyclass(name = "EnsembleSpec", module = "spikelab", from_py_object)]
#[derive(Clone)]
struct PySpec {
    inner: CoreSpec,
}

#[pymethods]
impl PySpec {
    /// `A = diag(spikes) + GOE(n, sigma²/n)`.
    #[staticmethod]
    #[pyo3(signature = (n, spikes, sigma = 1.0, seed = 0))]
    fn deformed_goe(n: usize, spikes: Vec<f64>, sigma: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreSpec::deformed_goe(n, sigma, spikes, seed).map_err(err)?,
        })
    }

    /// `S = XXᵀ/n` with population eigenvalues `spikes` (θ²) and ones.
    #[staticmethod]
    #[pyo3(signature = (n, p, spikes, seed = 0))]
    fn spiked(n: usize, p: usize, spikes: Vec<f64>, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreSpec::spiked(n, p, spikes, seed).map_err(err)?,
        })
    }

    #[getter]
    fn model(&self) -> &'static str {
        match self.inner.model {
            ModelKind::DeformedGoe => "deformed_goe",
            ModelKind::SpikedPopulation => "spiked_population",
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn spikes(&self) -> Vec<f64> {
        self.inner.spikes.clone()
    }

    fn with_seed(&self, seed: u64) -> Self {
        Self {
            inner: self.inner.with_seed(seed),
        }
    }

    /// The sampled matrix of one replicate as a list of rows.
    #[pyo3(signature = (replicate = 0))]
    fn sample(&self, replicate: u64) -> PyResult<Vec<Vec<f64>>> {
        let draw = draw_sample(&self.inner, replicate).map_err(err)?;
        let d = draw.matrix.dim();
        Ok((0..d).map(|i| (0..d).map(|j| draw.matrix.get(i, j)).collect()).collect())
    }

    /// Eigenvalues of one replicate, descending.
    #[pyo3(signature = (replicate = 0))]
    fn eigenvalues(&self, py: Python<'_>, replicate: u64) -> PyResult<Vec<f64>> {
        let spec = self.inner.clone();
        py.detach(move || core_eigenvalues(&draw_sample(&spec, replicate)?.matrix))
            .map_err(err)
    }

    /// Approximate eigenvector diagnostics for spike `i` of one replicate.
    #[pyo3(signature = (i = 1, replicate = 0, smallest = false))]
    fn approx_ev<'py>(&self, py: Python<'py>, i: usize, replicate: u64, smallest: bool) -> PyResult<Bound<'py, PyAny>> {
        let draw = draw_sample(&self.inner, replicate).map_err(err)?;
        let report = match (self.inner.model, smallest) {
            (ModelKind::DeformedGoe, false) => approxev::goe_approx_ev(&draw, i),
            (ModelKind::DeformedGoe, true) => {
                return Err(PyValueError::new_err("smallest applies to the spiked model only"))
            }
            (ModelKind::SpikedPopulation, false) => approxev::spm_approx_ev(&draw, i),
            (ModelKind::SpikedPopulation, true) => approxev::spm_approx_ev_smallest(&draw, i),
        }
        .map_err(err)?;
        serialize(py, &report)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "EnsembleSpec(model={}, n={}, dim={}, spikes={:?}, seed={})",
            self.model(),
            self.inner.n,
            self.inner.dim(),
            self.inner.spikes,
            self.inner.seed
        )
    }
}

/// Eigenvalues of a symmetric matrix given as a list of rows, descending.
#[pyfunction]
fn eigenvalues(rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    for i in 0..n {
        for j in 0..i {
            let scale = 1.0 + rows[i][j].abs().max(rows[j][i].abs());
            if (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale {
                return Err(PyValueError::new_err(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    core_eigenvalues(&SymMatrix::from_upper_fn(n, |i, j| rows[i][j])).map_err(err)
}

/// `(λ_θ, branch)` for the deformed GOE.
#[pyfunction]
#[pyo3(signature = (theta, sigma = 1.0))]
fn lambda_theta(theta: f64, sigma: f64) -> PyResult<(f64, &'static str)> {
    let lim = limits::lambda_theta(theta, sigma).map_err(err)?;
    Ok((lim.value, lim.branch.as_str()))
}

/// `(λ_{θ,c}, branch)` for the spiked model, from `θ²`.
#[pyfunction]
fn lambda_theta_c(theta_sq: f64, c: f64) -> PyResult<(f64, &'static str)> {
    let lim = limits::lambda_theta_c(theta_sq, c).map_err(err)?;
    Ok((lim.value, lim.branch.as_str()))
}

/// Semicircle Stieltjes transform and its derivative at `z > 2σ`.
#[pyfunction]
#[pyo3(signature = (z, sigma = 1.0))]
fn semicircle_stieltjes(z: f64, sigma: f64) -> PyResult<(f64, f64)> {
    limits::semicircle_stieltjes(z, sigma).map_err(err)
}

/// Marchenko–Pastur companion Stieltjes transform and derivative off the bulk.
#[pyfunction]
fn mp_stieltjes(z: f64, c: f64) -> PyResult<(f64, f64)> {
    limits::mp_stieltjes(z, c).map_err(err)
}

/// Right-hand side of a deviation bound. `theorem` is one of
/// `t1i, t1ii, t2i, t2ii, t3i, t3ii`.
#[pyfunction]
#[pyo3(signature = (theorem, n, i, t, spikes, p = 0, sigma = 1.0, delta = 0.25, c2 = None, c3 = None))]
#[allow(clippy::too_many_arguments)]
fn bound_rhs(
    theorem: &str,
    n: usize,
    i: usize,
    t: f64,
    spikes: Vec<f64>,
    p: usize,
    sigma: f64,
    delta: f64,
    c2: Option<f64>,
    c3: Option<f64>,
) -> PyResult<f64> {
    let mut params = BoundParams::new(parse_theorem(theorem)?, n, p, i, t, spikes)
        .with_sigma(sigma)
        .with_delta(delta);
    params.c2 = c2;
    params.c3 = c3;
    params.bound_rhs().map_err(err)
}

/// Spike estimate for one observed sample eigenvalue.
#[pyfunction]
fn invert_spike<'py>(py: Python<'py>, lambda_obs: f64, c: f64) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &estimator::invert_spike(lambda_obs, c).map_err(err)?)
}

/// ρ-metric distance between two points of the unit ball.
#[pyfunction]
fn rho(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    nets::rho_coords(&x, &y).map_err(err)
}

/// An ε-net of `[0, 1]` (`m = 1`) or of `B^m`, as a list of points.
#[pyfunction]
#[pyo3(signature = (m, epsilon, seed = 0))]
fn epsilon_net(m: usize, epsilon: f64, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let net = if m == 1 {
        nets::net_interval(epsilon)
    } else {
        nets::net_ball(m, epsilon, &mut SeedStream::new(seed).stream(domain::NET_SPHERE, 0))
    }
    .map_err(err)?;
    Ok(net.points.into_iter().map(|p| p.coords).collect())
}

/// Runs a tail experiment given as a JSON plan and returns the report.
#[pyfunction]
fn run_tail<'py>(py: Python<'py>, plan_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let plan = ExperimentPlan::from_json(plan_json).map_err(err)?;
    let report = py.detach(|| mc::run_tail(&plan)).map_err(err)?;
    serialize(py, &report)
}

/// Runs a fluctuation sweep given as a JSON plan and returns the report.
#[pyfunction]
fn convergence_sweep<'py>(py: Python<'py>, plan_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let plan: SweepPlan =
        serde_json::from_str(plan_json).map_err(|e| PyValueError::new_err(format!("cannot parse plan: {e}")))?;
    let report = py.detach(|| mc::convergence_sweep(&plan)).map_err(err)?;
    serialize(py, &report)
}

/// Wilson score interval for `hits` in `trials` at 95%.
#[pyfunction]
fn wilson_interval(hits: usize, trials: usize) -> (f64, f64) {
    mc::wilson_interval(hits, trials, mc::WILSON_Z95)
}

#[pymodule]
fn spikelab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySpec>()?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_theta, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_theta_c, m)?)?;
    m.add_function(wrap_pyfunction!(semicircle_stieltjes, m)?)?;
    m.add_function(wrap_pyfunction!(mp_stieltjes, m)?)?;
    m.add_function(wrap_pyfunction!(bound_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(invert_spike, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_net, m)?)?;
    m.add_function(wrap_pyfunction!(run_tail, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_interval, m)?)?;
    Ok(())
}
