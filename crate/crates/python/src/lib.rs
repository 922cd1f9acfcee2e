//! Python bindings for `fkss`. Fields cross the boundary as flat lists in
//! row-major grid order.

use fkss::admissibility::{check, AdmissibilityReport, ExponentTuple, Rule};
use fkss::cli::{defaults_text, parse_config, run_suite, RunConfig, Suite};
use fkss::kernel::{eval_kernel, eval_kernel_at_time};
use fkss::solver::{continue_run, Solver};
use fkss::specfun::{gamma_fn, mainardi as mainardi_fn, mittag_leffler as ml, EvalPolicy, MLOrder};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Two-parameter Mittag-Leffler function `E_{beta,gamma}(z)` for real `z <= 0`.
#[pyfunction]
#[pyo3(signature = (beta, gamma, z))]
fn mittag_leffler(beta: f64, gamma: f64, z: f64) -> PyResult<f64> {
    let order = MLOrder::new(beta, gamma).map_err(value_err)?;
    ml(order, z, &EvalPolicy::default()).map_err(value_err)
}

/// Mainardi (M-Wright) density `M_beta(s)` for `s >= 0`.
#[pyfunction]
fn mainardi(beta: f64, s: f64) -> PyResult<f64> {
    mainardi_fn(beta, s, &EvalPolicy::default()).map_err(value_err)
}

/// Euler Gamma function.
#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    gamma_fn(x).map_err(value_err)
}

/// Radial fractional heat kernel; returns `(value, abs_err)`. With `t`
/// given, evaluates `K_t` instead of the unit-time kernel.
#[pyfunction]
#[pyo3(signature = (alpha, d, x, t=None))]
fn kernel(alpha: f64, d: usize, x: f64, t: Option<f64>) -> PyResult<(f64, f64)> {
    let k = match t {
        Some(t) => eval_kernel_at_time(alpha, d, t, x),
        None => eval_kernel(alpha, d, x),
    }
    .map_err(value_err)?;
    Ok((k.value, k.abs_err))
}

#[pyclass(name = "AdmissibilityReport", frozen)]
struct PyReport {
    inner: AdmissibilityReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn satisfied(&self) -> bool {
        self.inner.satisfied
    }

    #[getter]
    fn rule(&self) -> &'static str {
        self.inner.rule.name()
    }

    #[getter]
    fn case_path(&self) -> Vec<String> {
        self.inner.case_path.clone()
    }

    #[getter]
    fn violated_inequalities(&self) -> Vec<String> {
        self.inner.violated_inequalities.clone()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("AdmissibilityReport(rule={}, satisfied={})", self.inner.rule, self.inner.satisfied)
    }
}

/// Checks an exponent tuple against one rule set (`theorem1`, `assumption1`,
/// `theorem3` or `assumption2`). Use `float('inf')` for infinite exponents.
#[pyfunction]
#[pyo3(signature = (rule, d, alpha, beta, p, q, r, mu=0.0))]
#[allow(clippy::too_many_arguments)]
fn check_exponents(rule: &str, d: u32, alpha: f64, beta: f64, p: f64, q: f64, r: f64, mu: f64) -> PyResult<PyReport> {
    let rule: Rule = rule.parse().map_err(value_err)?;
    let t = ExponentTuple { d, alpha, beta, mu, p, q, r };
    Ok(PyReport {
        inner: check(rule, &t).map_err(value_err)?,
    })
}

/// Default configuration file, one `key = value` per line.
#[pyfunction]
fn default_config() -> String {
    defaults_text()
}

/// Runs a built-in verification suite and returns `(name, passed, measured)`
/// for every check.
#[pyfunction]
#[pyo3(signature = (suite="all"))]
fn verify(py: Python<'_>, suite: &str) -> PyResult<Vec<(String, bool, f64)>> {
    let suite = match suite.to_ascii_lowercase().as_str() {
        "specfun" => Suite::Specfun,
        "kernel" => Suite::Kernel,
        "propagator" => Suite::Propagator,
        "solver" => Suite::Solver,
        "all" => Suite::All,
        other => return Err(PyValueError::new_err(format!("unknown suite '{other}'"))),
    };
    let checks = py.detach(|| run_suite(suite));
    Ok(checks.into_iter().map(|c| (c.name, c.passed, c.measured)).collect())
}

/// A time-stepping run built from configuration text.
#[pyclass(name = "Simulation", unsendable)]
struct PySimulation {
    config: RunConfig,
    solver: Solver,
    last_csv: String,
    blowup: Option<String>,
}

#[pymethods]
impl PySimulation {
    /// Builds the run from `key = value` text; omitted keys take their defaults.
    #[new]
    #[pyo3(signature = (config=""))]
    fn new(config: &str) -> PyResult<Self> {
        let cfg = parse_config(config).map_err(|errs| {
            let lines: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
            PyValueError::new_err(lines.join("\n"))
        })?;
        let init = cfg.initial_state().map_err(value_err)?;
        let solver = Solver::new(cfg.solver.clone(), init).map_err(value_err)?;
        Ok(Self {
            config: cfg,
            solver,
            last_csv: String::new(),
            blowup: None,
        })
    }

    /// Advances `count` steps without recording diagnostics.
    #[pyo3(signature = (count=1))]
    fn step(&mut self, count: usize) -> PyResult<()> {
        for _ in 0..count {
            self.solver.step().map_err(runtime_err)?;
        }
        Ok(())
    }

    /// Steps up to the configured step count, recording diagnostics. Returns
    /// `False` if the run stopped early on a blow-up.
    fn run(&mut self, py: Python<'_>) -> PyResult<bool> {
        let solver = self.solver.clone();
        let out = py.detach(move || continue_run(solver)).map_err(runtime_err)?;
        let mut bytes = Vec::new();
        out.diagnostics.write_csv(&mut bytes).map_err(runtime_err)?;
        self.last_csv = String::from_utf8(bytes).map_err(runtime_err)?;
        self.blowup = out
            .blowup
            .as_ref()
            .map(|b| format!("{} at step {} (t = {})", b.reason, b.step, b.t_stop));
        self.solver = out.solver;
        Ok(self.blowup.is_none())
    }

    #[getter]
    fn time(&self) -> f64 {
        self.solver.time()
    }

    #[getter]
    fn steps_done(&self) -> usize {
        self.solver.steps_done()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        let g = self.config.solver.grid;
        (g.d(), g.n())
    }

    /// Cell-centre coordinates, one list per grid point.
    fn coordinates(&self) -> Vec<Vec<f64>> {
        let g = self.config.solver.grid;
        (0..g.len()).map(|i| g.coords(i)[..g.d()].to_vec()).collect()
    }

    fn density(&self) -> Vec<f64> {
        self.solver.state().n.values().to_vec()
    }

    fn attractant(&self) -> Vec<f64> {
        self.solver.state().v.values().to_vec()
    }

    /// Velocity components, one flat list per axis.
    fn velocity(&self) -> Vec<Vec<f64>> {
        self.solver.state().u.components().iter().map(|c| c.values().to_vec()).collect()
    }

    fn mass(&self) -> (f64, f64) {
        let s = self.solver.state();
        (s.n.integral(), s.v.integral())
    }

    /// Diagnostics CSV of the most recent `run()` call.
    #[getter]
    fn diagnostics_csv(&self) -> String {
        self.last_csv.clone()
    }

    #[getter]
    fn blowup(&self) -> Option<String> {
        self.blowup.clone()
    }
}

#[pymodule]
fn pyfkss(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(mainardi, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(check_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySimulation>()?;
    Ok(())
}
