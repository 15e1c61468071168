//! Python bindings. Reports cross the boundary as JSON strings so the
//! Python side sees exactly what the command-line tool writes.

use clap::Parser;
use maxwell_hj::cli::{execute, Cli};
use maxwell_hj::report;
use maxwell_hj::{
    exprs, run_audit, AuditOptions, EikonalAnsatz, FieldConfiguration, Lattice, Rank2, ScalarExpr, Scenario,
    SpacetimeSolution, SplitFunctional, MAX_DIM,
};
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

fn err(e: maxwell_hj::Error) -> PyErr {
    match e {
        maxwell_hj::Error::IndexOutOfRange { .. } | maxwell_hj::Error::SlotOutOfRange(_) => {
            PyIndexError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point(v: &[f64], what: &str) -> PyResult<[f64; MAX_DIM]> {
    if v.len() > MAX_DIM {
        return Err(PyValueError::new_err(format!("{what} has {} entries, at most {MAX_DIM} allowed", v.len())));
    }
    let mut out = [0.0; MAX_DIM];
    out[..v.len()].copy_from_slice(v);
    Ok(out)
}

/// Scalar expression in the spacetime coordinates `x0..x3`.
#[pyclass(name = "Expr", module = "maxwell_hj", frozen)]
pub struct PyExpr(ScalarExpr);

#[pymethods]
impl PyExpr {
    #[new]
    fn new(src: &str) -> PyResult<Self> {
        exprs::parse(src).map(Self).map_err(err)
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.0.eval(&point(&x, "x")?))
    }

    fn partial(&self, mu: usize) -> PyResult<Self> {
        if mu >= MAX_DIM {
            return Err(PyIndexError::new_err(format!("axis {mu} out of range")));
        }
        Ok(Self(self.0.partial(mu)))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.0)
    }
}

#[pyclass(name = "Lattice", module = "maxwell_hj", frozen)]
pub struct PyLattice(Lattice);

#[pymethods]
impl PyLattice {
    #[new]
    fn new(dim: usize, n: usize, h: f64) -> PyResult<Self> {
        Lattice::new(dim, n, h).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.0.sites()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.0.volume()
    }

    fn __repr__(&self) -> String {
        format!("Lattice(dim={}, n={}, h={})", self.0.dim(), self.0.n(), self.0.h())
    }
}

/// Field configuration `A_mu` on a lattice slice.
#[pyclass(name = "Configuration", module = "maxwell_hj")]
pub struct PyConfiguration(FieldConfiguration);

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(lattice: &PyLattice, t: f64, components: Vec<Vec<f64>>) -> PyResult<Self> {
        FieldConfiguration::new(lattice.0, t, components).map(Self).map_err(err)
    }

    #[staticmethod]
    fn constant_electric(lattice: &PyLattice, e: f64, t: f64) -> PyResult<Self> {
        let sol = SpacetimeSolution::constant_electric(lattice.0.dim(), e).map_err(err)?;
        sol.sample(&lattice.0, t).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (lattice, amplitude, modes, t=0.0))]
    fn plane_wave(lattice: &PyLattice, amplitude: f64, modes: Vec<i64>, t: f64) -> PyResult<Self> {
        let sol = SpacetimeSolution::plane_wave(lattice.0.dim(), amplitude, &modes, lattice.0.length()).map_err(err)?;
        sol.sample(&lattice.0, t).map(Self).map_err(err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t()
    }

    fn component(&self, mu: usize) -> PyResult<Vec<f64>> {
        if mu >= self.0.lattice().dim() {
            return Err(PyIndexError::new_err(format!("component {mu} out of range")));
        }
        Ok(self.0.component(mu).to_vec())
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_csv(&mut buf).map_err(err)?;
        String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Polymomentum ansatz `S^mu = g^mu + f^{mu nu} A_nu + 1/2 Q^{mu nu rho} A_nu A_rho`.
#[pyclass(name = "Ansatz", module = "maxwell_hj", frozen)]
pub struct PyAnsatz(EikonalAnsatz);

#[pymethods]
impl PyAnsatz {
    /// Linear ansatz from expression sources: `g` has `dim` entries, `f` is
    /// `dim x dim`.
    #[new]
    fn new(g: Vec<String>, f: Vec<Vec<String>>) -> PyResult<Self> {
        let g = g.iter().map(|s| exprs::parse(s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let f = f
            .iter()
            .map(|row| row.iter().map(|s| exprs::parse(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        EikonalAnsatz::new(g, f, None).map(Self).map_err(err)
    }

    #[staticmethod]
    fn zero(dim: usize) -> PyResult<Self> {
        EikonalAnsatz::zero(dim).map(Self).map_err(err)
    }

    #[staticmethod]
    fn constant_electric(dim: usize, e: f64) -> PyResult<Self> {
        EikonalAnsatz::constant_electric(dim, e).map(Self).map_err(err)
    }

    #[staticmethod]
    fn plane_wave(dim: usize, amplitude: f64, modes: Vec<i64>, length: f64) -> PyResult<Self> {
        EikonalAnsatz::plane_wave(dim, amplitude, &modes, length).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn is_admissible(&self) -> bool {
        self.0.is_admissible()
    }

    fn eval_s(&self, a: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.eval_s(&point(&a, "A")?, &point(&x, "x")?))
    }

    fn ds_da(&self, a: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(Rank2::to_rows(&self.0.ds_da(&point(&a, "A")?, &point(&x, "x")?)))
    }

    fn ddw_residual(&self, a: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.0.ddw_residual(&point(&a, "A")?, &point(&x, "x")?))
    }

    fn constraint_residual(&self, a: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(Rank2::to_rows(&self.0.constraint_residual(&point(&a, "A")?, &point(&x, "x")?)))
    }

    fn embed_field_strength(&self, a: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(Rank2::to_rows(&self.0.embed_field_strength(&point(&a, "A")?, &point(&x, "x")?)))
    }

    fn __repr__(&self) -> String {
        format!("Ansatz(dim={}, linear={})", self.0.dim(), self.0.is_linear())
    }
}

/// Covariant residual and constraint sampled on the lattice and at random
/// points; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (ansatz, lattice, t=0.0, samples=100, seed=0, tolerance=1e-12))]
fn verify_ddw(ansatz: &PyAnsatz, lattice: &PyLattice, t: f64, samples: usize, seed: u64, tolerance: f64) -> PyResult<String> {
    let r = report::verify_ddw(&ansatz.0, &lattice.0, t, samples, seed, tolerance).map_err(err)?;
    serde_json::to_string(&r).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Step-by-step audit of the split on one slice, as a JSON array.
#[pyfunction]
#[pyo3(signature = (ansatz, config, seed=0, lattice_constant=1.0))]
fn audit(ansatz: &PyAnsatz, config: &PyConfiguration, seed: u64, lattice_constant: f64) -> PyResult<String> {
    let r = run_audit(&ansatz.0, &config.0, &AuditOptions { lattice_constant, seed }).map_err(err)?;
    r.to_json().map_err(err)
}

/// `(dS/dt + H, dS/dt - H)` of the canonical equation on a slice.
#[pyfunction]
#[pyo3(signature = (ansatz, config, include_a0=true))]
fn canonical_residual(ansatz: &PyAnsatz, config: &PyConfiguration, include_a0: bool) -> PyResult<(f64, f64)> {
    let f = SplitFunctional::new(ansatz.0.clone(), *config.0.lattice(), config.0.t()).map_err(err)?;
    let r = f.canonical_hj_residual(&config.0, include_a0).map_err(err)?;
    Ok((r.residual, r.residual_opposite_sign))
}

/// Characteristics evolution against the leapfrog reference; returns the
/// JSON comparison report and the final slice.
#[pyfunction]
#[pyo3(signature = (ansatz, config, dt, steps, gauge=None, lattice_constant=1.0))]
fn evolve(
    ansatz: &PyAnsatz,
    config: &PyConfiguration,
    dt: f64,
    steps: usize,
    gauge: Option<&PyExpr>,
    lattice_constant: f64,
) -> PyResult<(String, PyConfiguration)> {
    let gauge = gauge.map(|g| g.0.clone()).unwrap_or_else(ScalarExpr::zero);
    let (r, traj) =
        report::evolve(&ansatz.0, &config.0, &gauge, dt, steps, None, lattice_constant).map_err(err)?;
    let json = serde_json::to_string(&r).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((json, PyConfiguration(traj.into_iter().last().expect("at least the initial slice"))))
}

/// Checks that scenario text parses; returns its JSON summary.
#[pyfunction]
fn parse_scenario(text: &str) -> PyResult<String> {
    let s = Scenario::parse(text).map_err(err)?;
    serde_json::to_string(&s.summary()).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a command-line verb in-process, e.g. `run(["audit", "--scenario", p])`.
/// Returns `(passed, output)`.
#[pyfunction]
fn run(py: Python<'_>, args: Vec<String>) -> PyResult<(bool, String)> {
    let cli = Cli::try_parse_from(std::iter::once("maxwell-hj".to_string()).chain(args))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = py.detach(|| execute(&cli.command)).map_err(err)?;
    Ok((out.passed, out.text))
}

#[pymodule]
#[pyo3(name = "maxwell_hj")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyAnsatz>()?;
    m.add_function(wrap_pyfunction!(verify_ddw, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_residual, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(parse_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("SCHEMA_VERSION", maxwell_hj::cli::SCHEMA_VERSION)?;
    Ok(())
}
