use std::path::PathBuf;
use std::sync::Arc;

use hecke_signs::cli::calibration::Calibration;
use hecke_signs::cli::config::ExperimentConfig;
use hecke_signs::cli::experiments::{run_experiment, Experiment};
use hecke_signs::cli::report::Report;
use hecke_signs::cli::store::TableStore;
use hecke_signs::coeffs::{FormKind, FormSpec, PrimeEigenvalueTable};
use hecke_signs::multeval::{evaluate_window, MultiplicativeSpec};
use hecke_signs::stats::{serre_cm_density, sign_report as window_report, SignReport};
use hecke_signs::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(hecke_signs, HeckeSignsError, PyException);

fn py_err(e: Error) -> PyErr {
    HeckeSignsError::new_err(e.to_string())
}

pub fn form_spec(form: &str, seed: u64) -> hecke_signs::Result<FormSpec> {
    let kind = FormKind::from_name(form).ok_or_else(|| Error::InvalidParameter(format!("unknown form `{form}`")))?;
    let spec = FormSpec::new(kind).with_seed(seed);
    spec.validate()?;
    Ok(spec)
}

pub fn build_table(form: &str, limit: u64, seed: u64) -> hecke_signs::Result<PrimeEigenvalueTable> {
    form_spec(form, seed)?.build_table(limit)
}

/// λ(1), ..., λ(x).
pub fn coefficient_values(form: &str, x: u64, seed: u64) -> hecke_signs::Result<Vec<f64>> {
    let table = Arc::new(build_table(form, x.max(2), seed)?);
    let w = evaluate_window(&MultiplicativeSpec::hecke_extend(table), 1, x + 1)?;
    Ok((1..=x).map(|n| w.value(n)).collect())
}

pub fn form_sign_report(form: &str, x: u64, seed: u64) -> hecke_signs::Result<SignReport> {
    let table = Arc::new(build_table(form, x.max(2), seed)?);
    let w = evaluate_window(&MultiplicativeSpec::hecke_extend(table), 1, x + 1)?;
    window_report(&w)
}

/// Run a named experiment in memory and return the canonical JSON report.
pub fn experiment_json(name: &str, config: Option<&str>, cache_dir: Option<PathBuf>) -> hecke_signs::Result<String> {
    let exp: Experiment = name.parse()?;
    let mut cfg = match config {
        Some(text) => ExperimentConfig::from_json(text)?,
        None => ExperimentConfig::default(),
    };
    if cache_dir.is_some() {
        cfg.cache_dir = cache_dir;
    }
    cfg.validate()?;
    let cal = match &cfg.calibration {
        Some(path) => Calibration::load(path)?,
        None => Calibration::bundled()?,
    };
    let mut store = TableStore::new(cfg.cache_dir());
    let out = run_experiment(exp, &cfg, &mut store, &cal.constants)?;
    Report::new(exp.name(), &cfg, out.result, out.checks, out.summary).to_json()
}

/// Primes up to `limit` and their normalized eigenvalues.
#[pyfunction]
#[pyo3(signature = (form, limit, seed=0))]
fn prime_table(py: Python<'_>, form: &str, limit: u64, seed: u64) -> PyResult<(Vec<u64>, Vec<f64>)> {
    let t = py.detach(|| build_table(form, limit, seed)).map_err(py_err)?;
    Ok((t.primes().to_vec(), t.lambdas().to_vec()))
}

#[pyfunction]
#[pyo3(signature = (form, x, seed=0))]
fn coefficients(py: Python<'_>, form: &str, x: u64, seed: u64) -> PyResult<Vec<f64>> {
    py.detach(|| coefficient_values(form, x, seed)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (form, x, seed=0))]
fn sign_report<'py>(py: Python<'py>, form: &str, x: u64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| form_sign_report(form, x, seed)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("X", r.x)?;
    d.set_item("n_pos", r.n_pos)?;
    d.set_item("n_neg", r.n_neg)?;
    d.set_item("n_zero", r.n_zero)?;
    d.set_item("sign_changes", r.sign_changes)?;
    d.set_item("chowla_sum", r.chowla_sum)?;
    Ok(d)
}

/// (vanishing sum, reference, difference) for the CM form at P.
#[pyfunction]
fn serre_density(py: Python<'_>, p_max: u64) -> PyResult<(f64, f64, f64)> {
    let s = py
        .detach(|| {
            let t = build_table("cm", p_max, 0)?;
            serre_cm_density(&t, p_max)
        })
        .map_err(py_err)?;
    Ok((s.vanishing_sum, s.reference, s.difference))
}

#[pyfunction]
#[pyo3(signature = (experiment, config=None, cache_dir=None))]
fn run(py: Python<'_>, experiment: &str, config: Option<&str>, cache_dir: Option<PathBuf>) -> PyResult<String> {
    py.detach(|| experiment_json(experiment, config, cache_dir)).map_err(py_err)
}

#[pyfunction]
fn default_config() -> PyResult<String> {
    ExperimentConfig::default().to_json().map_err(py_err)
}

#[pyfunction]
fn experiments() -> Vec<&'static str> {
    Experiment::ALL.iter().map(|e| e.name()).collect()
}

#[pymodule]
#[pyo3(name = "hecke_signs")]
pub fn hecke_signs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("HeckeSignsError", m.py().get_type::<HeckeSignsError>())?;
    m.add_function(wrap_pyfunction!(prime_table, m)?)?;
    m.add_function(wrap_pyfunction!(coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(sign_report, m)?)?;
    m.add_function(wrap_pyfunction!(serre_density, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(experiments, m)?)?;
    Ok(())
}
