//! Python bindings. Contracts and sidecars are passed as source text.

use std::time::Duration;

use michelson_vc::interp::{run_contract, ExecConfig, Outcome};
use michelson_vc::model::value_of_data;
use michelson_vc::solver::{run_all, RunConfig};
use michelson_vc::syntax::{parse_data, parse_source, pretty_print, Contract};
use michelson_vc::typecheck::{derive_safety_spec, typecheck, TypedProgram};
use michelson_vc::vcgen::{generate_mono, parse_sidecar, smt_jobs, translate_faithful, SpecSidecar};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn contract(src: &str) -> PyResult<Contract> {
    parse_source(src).map_err(err)
}

fn typed(src: &str) -> PyResult<TypedProgram> {
    typecheck(&contract(src)?).map_err(err)
}

fn sidecar(tp: &TypedProgram, spec: Option<&str>) -> PyResult<SpecSidecar> {
    let sc = parse_sidecar(spec.unwrap_or("")).map_err(err)?;
    sc.check_paths(tp).map_err(err)?;
    Ok(sc)
}

/// Canonical printed form of a contract.
#[pyfunction]
fn parse(src: &str) -> PyResult<String> {
    Ok(pretty_print(&contract(src)?))
}

/// Safety specification derived by the typechecker.
#[pyfunction(name = "typecheck")]
fn typecheck_py(src: &str) -> PyResult<String> {
    Ok(derive_safety_spec(&typed(src)?).to_string())
}

/// Run a contract. Returns `(outcome, detail)` where outcome is one of
/// "success", "failed", "fuel", "violation".
#[pyfunction]
#[pyo3(signature = (src, parameter, storage, fuel = 10_000, check_contracts = false))]
fn run(src: &str, parameter: &str, storage: &str, fuel: u64, check_contracts: bool) -> PyResult<(String, String)> {
    let c = contract(src)?;
    typecheck(&c).map_err(err)?;
    let p = value_of_data(&parse_data(parameter).map_err(err)?, &c.parameter).map_err(err)?;
    let s = value_of_data(&parse_data(storage).map_err(err)?, &c.storage).map_err(err)?;
    let cfg = ExecConfig { fuel, check_contracts, ..ExecConfig::default() };
    Ok(match run_contract(&c, p, s, &cfg, None).map_err(err)? {
        Outcome::Success(st) => ("success".into(), st.at(0).map(|v| v.to_string()).unwrap_or_default()),
        Outcome::Failed(v) => ("failed".into(), v.to_string()),
        Outcome::FuelExhausted => ("fuel".into(), String::new()),
        Outcome::ContractViolation { path, opcode, clause } => ("violation".into(), format!("{opcode} at {path} violates {clause}")),
    })
}

/// Faithful translation as text.
#[pyfunction]
#[pyo3(signature = (src, spec = None))]
fn vcgen_faithful(src: &str, spec: Option<&str>) -> PyResult<String> {
    let tp = typed(src)?;
    let sc = sidecar(&tp, spec)?;
    Ok(translate_faithful(&tp, &sc))
}

/// Names of the monolithic VCs.
#[pyfunction]
#[pyo3(signature = (src, spec = None))]
fn vc_names(src: &str, spec: Option<&str>) -> PyResult<Vec<String>> {
    let tp = typed(src)?;
    let sc = sidecar(&tp, spec)?;
    let out = generate_mono(&tp, &sc).map_err(err)?;
    Ok(out.vcs.into_iter().map(|v| v.name).collect())
}

/// Discharge every VC with the default solver. Returns one dict per VC.
#[pyfunction]
#[pyo3(signature = (src, spec = None, timeout = 10.0, jobs = 1))]
fn prove<'py>(py: Python<'py>, src: &str, spec: Option<&str>, timeout: f64, jobs: usize) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let tp = typed(src)?;
    let sc = sidecar(&tp, spec)?;
    let out = generate_mono(&tp, &sc).map_err(err)?;
    let js = smt_jobs(&out.vcs, &sc.logic, true).map_err(err)?;
    let cfg = RunConfig { timeout: Duration::from_secs_f64(timeout), jobs, ..Default::default() };
    cfg.validate().map_err(err)?;
    let vs = run_all(&js, &cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    vs.into_iter()
        .map(|v| {
            let d = PyDict::new(py);
            d.set_item("vc", v.vc)?;
            d.set_item("status", v.status.label())?;
            d.set_item("prover", v.prover)?;
            d.set_item("seconds", v.seconds)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "michelson_vc")]
fn michelson_vc_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(typecheck_py, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(vcgen_faithful, m)?)?;
    m.add_function(wrap_pyfunction!(vc_names, m)?)?;
    m.add_function(wrap_pyfunction!(prove, m)?)?;
    Ok(())
}
