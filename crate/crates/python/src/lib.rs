use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use nehari::cone::{check_cone as core_check_cone, default_tolerance, harnack_lemma_check};
use nehari::energy::{apply_t as core_apply_t, energy_e, nehari_project as core_project};
use nehari::error::NehariError as CoreError;
use nehari::grid::{integrate as core_integrate, norm_w1p as core_norm, Grid, SampledFunction};
use nehari::hypotheses::{
    capital_phi as core_phi, capital_psi as core_psi, check_all, feasibility_sweep, Annulus, CheckOptions,
    HypothesisContext, SweepGrid,
};
use nehari::nonlinearity::NonlinearitySpec;
use nehari::plaplacian::{apply_j as core_apply_j, eigen_p, invert_j as core_invert_j, shoot_solve, DualDensity, ShootOptions, EIGEN_TOL};
use nehari::solver::{solve_annulus, InitialGuess, SolveOptions, SolveReport};

create_exception!(pynehari, NehariError, PyException, "Numerical or argument error raised by the solver.");

fn err(e: CoreError) -> PyErr {
    match e {
        CoreError::InvalidArgument(_) | CoreError::InvalidGrid(_) | CoreError::GridMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => NehariError::new_err(other.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn report<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let json = serde_json::to_value(value).map_err(|e| NehariError::new_err(e.to_string()))?;
    to_py(py, &json)
}

fn sampled(values: Vec<f64>) -> PyResult<SampledFunction> {
    let grid = Grid::new(values.len()).map_err(err)?;
    SampledFunction::new(grid, values).map_err(err)
}

/// Nonlinearity f(t) on t >= 0.
#[pyclass(name = "Nonlinearity", module = "pynehari", from_py_object)]
#[derive(Clone)]
pub struct PyNonlinearity {
    inner: NonlinearitySpec,
}

#[pymethods]
impl PyNonlinearity {
    /// f(t) = Σ a t^mu.
    #[staticmethod]
    fn power_sum(terms: Vec<(f64, f64)>) -> PyResult<Self> {
        Self::checked(NonlinearitySpec::PowerSum { terms })
    }

    /// f(t) = t^{p-1} (a + b sin(omega ln(1 + t))).
    #[staticmethod]
    fn log_oscillator(p: f64, a: f64, b: f64, omega: f64) -> PyResult<Self> {
        Self::checked(NonlinearitySpec::LogOscillator { p, a, b, omega })
    }

    /// Piecewise-linear interpolation of (t, f) points starting at t = 0.
    #[staticmethod]
    fn table(points: Vec<(f64, f64)>) -> PyResult<Self> {
        Self::checked(NonlinearitySpec::Table { points })
    }

    /// Parses the `{"variant": ...}` JSON form used in config files.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: NonlinearitySpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::checked(inner)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("spec serializes")
    }

    fn f(&self, t: f64) -> PyResult<f64> {
        self.inner.eval_f(t).map_err(err)
    }

    /// Primitive F(xi) = ∫_0^xi f.
    #[pyo3(name = "F")]
    fn big_f(&self, xi: f64) -> PyResult<f64> {
        self.inner.eval_big_f(xi).map_err(err)
    }

    fn g(&self, t: f64, p: f64) -> PyResult<f64> {
        self.inner.eval_g(t, p).map_err(err)
    }

    fn fprime(&self, t: f64) -> PyResult<f64> {
        self.inner.eval_fprime(t).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Nonlinearity({})", self.to_json())
    }
}

impl PyNonlinearity {
    fn checked(inner: NonlinearitySpec) -> PyResult<Self> {
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }
}

/// Result of a solve inside one annulus.
#[pyclass(name = "SolveResult", module = "pynehari", frozen)]
pub struct PySolveResult {
    inner: SolveReport,
}

#[pymethods]
impl PySolveResult {
    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm_1p
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn iters(&self) -> usize {
        self.inner.iters
    }

    #[getter]
    fn projection_factors(&self) -> Vec<f64> {
        self.inner.projection_factors.clone()
    }

    #[getter]
    fn solution(&self) -> Vec<f64> {
        self.inner.solution.values().to_vec()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.solution.grid().nodes().collect()
    }

    /// Full report as a dict (the solve.json payload).
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(converged={}, norm={:.10e}, residual={:.3e}, iters={})",
            self.inner.converged, self.inner.norm_1p, self.inner.residual, self.inner.iters
        )
    }
}

/// Grid nodes t_i = i / (n - 1).
#[pyfunction]
#[pyo3(signature = (n = 401))]
fn nodes(n: usize) -> PyResult<Vec<f64>> {
    Ok(Grid::new(n).map_err(err)?.nodes().collect())
}

/// Composite Simpson integral of nodal values on [0, 1].
#[pyfunction]
fn integrate(values: Vec<f64>) -> PyResult<f64> {
    Ok(core_integrate(&sampled(values)?))
}

/// |u|_{1,p} = (∫|u'|^p)^{1/p}.
#[pyfunction]
fn norm_w1p(values: Vec<f64>, p: f64) -> PyResult<f64> {
    Ok(core_norm(&sampled(values)?, p))
}

/// J(u) = -(|u'|^{p-2} u')'.
#[pyfunction]
fn apply_j(values: Vec<f64>, p: f64) -> PyResult<Vec<f64>> {
    Ok(core_apply_j(&sampled(values)?, p).values().to_vec())
}

/// Dirichlet solution u of J(u) = h.
#[pyfunction]
fn invert_j(density: Vec<f64>, p: f64) -> PyResult<Vec<f64>> {
    let h: DualDensity = sampled(density)?.into();
    Ok(core_invert_j(&h, p).map_err(err)?.into_values())
}

/// T(u) = J^{-1}(f(u)).
#[pyfunction]
fn apply_t(values: Vec<f64>, f: &PyNonlinearity, p: f64) -> PyResult<Vec<f64>> {
    Ok(core_apply_t(&sampled(values)?, &f.inner, p).map_err(err)?.into_values())
}

/// E(u) = |u|^p / p - ∫F(u).
#[pyfunction]
fn energy(values: Vec<f64>, f: &PyNonlinearity, p: f64) -> PyResult<f64> {
    energy_e(&sampled(values)?, &f.inner, p).map_err(err)
}

/// {"p", "lambda_p", "c_p"} of the first eigenpair.
#[pyfunction]
#[pyo3(signature = (p, n = 401, tol = EIGEN_TOL))]
fn eigen<'py>(py: Python<'py>, p: f64, n: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let e = eigen_p(p, tol, Grid::new(n).map_err(err)?).map_err(err)?;
    report(py, &e.summary())
}

/// Cone membership report; `tol` defaults to 1e-8 (1 + |u|).
#[pyfunction]
#[pyo3(signature = (values, p, tol = None))]
fn check_cone<'py>(py: Python<'py>, values: Vec<f64>, p: f64, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let u = sampled(values)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(&u, p));
    report(py, &core_check_cone(&u, p, tol))
}

/// Harnack inequality check with J(u) by finite differences.
#[pyfunction]
#[pyo3(signature = (values, p, tol = None))]
fn harnack<'py>(py: Python<'py>, values: Vec<f64>, p: f64, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let u = sampled(values)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(&u, p));
    report(py, &harnack_lemma_check(&u, p, tol))
}

#[pyfunction]
fn capital_phi(beta: f64, p: f64) -> f64 {
    core_phi(beta, p)
}

#[pyfunction]
fn capital_psi(beta: f64, p: f64) -> f64 {
    core_psi(beta, p)
}

/// s(u) with s(u) u on the Nehari manifold of the annulus (r, R).
#[pyfunction]
#[pyo3(name = "nehari_project")]
fn project(values: Vec<f64>, f: &PyNonlinearity, p: f64, r: f64, big_r: f64) -> PyResult<f64> {
    let annulus = Annulus::new(r, big_r, 0.25).map_err(err)?;
    Ok(core_project(&sampled(values)?, &f.inner, p, &annulus).map_err(err)?.s_value)
}

/// (h1), (h2), (h2') report for one annulus.
#[pyfunction]
#[pyo3(signature = (f, p, beta, r, big_r, n = 401))]
fn check_hypotheses<'py>(
    py: Python<'py>,
    f: &PyNonlinearity,
    p: f64,
    beta: f64,
    r: f64,
    big_r: f64,
    n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    Annulus::new(r, big_r, beta).map_err(err)?;
    let ctx = HypothesisContext::new(p, beta, Grid::new(n).map_err(err)?).map_err(err)?;
    report(py, &check_all(&ctx, &f.inner, r, big_r, &CheckOptions::default()).map_err(err)?)
}

/// Hypothesis reports over every (f, p, beta, annulus) combination.
#[pyfunction]
#[pyo3(signature = (fs, p_values, beta_values, annuli, n = 401))]
fn sweep<'py>(
    py: Python<'py>,
    fs: Vec<PyNonlinearity>,
    p_values: Vec<f64>,
    beta_values: Vec<f64>,
    annuli: Vec<(f64, f64)>,
    n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = SweepGrid { nonlinearities: fs.into_iter().map(|f| f.inner).collect(), p_values, beta_values, annuli };
    let mesh = Grid::new(n).map_err(err)?;
    let reports = py.detach(|| feasibility_sweep(&grid, mesh, &CheckOptions::default())).map_err(err)?;
    report(py, &reports)
}

/// Nehari-projected fixed-point iteration in the annulus (r, R).
#[pyfunction]
#[pyo3(signature = (f, p, r, big_r, beta = 0.25, n = 401, max_iters = 500, tol = 1e-8, damping = 1.0, initial_guess = "torsion"))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    f: &PyNonlinearity,
    p: f64,
    r: f64,
    big_r: f64,
    beta: f64,
    n: usize,
    max_iters: usize,
    tol: f64,
    damping: f64,
    initial_guess: &str,
) -> PyResult<PySolveResult> {
    let initial_guess = match initial_guess {
        "torsion" => InitialGuess::Torsion,
        "sine" => InitialGuess::Sine,
        other => return Err(PyValueError::new_err(format!("unknown initial guess {other:?}"))),
    };
    let annulus = Annulus::new(r, big_r, beta).map_err(err)?;
    let opts = SolveOptions { max_iters, tol_residual: tol, damping, initial_guess, grid: Grid::new(n).map_err(err)? };
    let spec = f.inner.clone();
    let inner = py.detach(|| solve_annulus(&spec, p, &annulus, &opts)).map_err(err)?;
    Ok(PySolveResult { inner })
}

/// Shooting solution with initial flux bracketed by (m1, m2).
#[pyfunction]
#[pyo3(signature = (f, p, m1, m2, n = 401))]
fn shoot<'py>(py: Python<'py>, f: &PyNonlinearity, p: f64, m1: f64, m2: f64, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let sol = shoot_solve(&f.inner, p, (m1, m2), Grid::new(n).map_err(err)?, &ShootOptions::default()).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("flux", sol.flux)?;
    out.set_item("endpoint_residual", sol.endpoint_residual)?;
    out.set_item("norm_1p", core_norm(&sol.solution, p))?;
    out.set_item("solution", sol.solution.into_values())?;
    Ok(out)
}

#[pymodule]
fn pynehari(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NehariError", m.py().get_type::<NehariError>())?;
    m.add_class::<PyNonlinearity>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(nodes, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(norm_w1p, m)?)?;
    m.add_function(wrap_pyfunction!(apply_j, m)?)?;
    m.add_function(wrap_pyfunction!(invert_j, m)?)?;
    m.add_function(wrap_pyfunction!(apply_t, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(eigen, m)?)?;
    m.add_function(wrap_pyfunction!(check_cone, m)?)?;
    m.add_function(wrap_pyfunction!(harnack, m)?)?;
    m.add_function(wrap_pyfunction!(capital_phi, m)?)?;
    m.add_function(wrap_pyfunction!(capital_psi, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(check_hypotheses, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    Ok(())
}
