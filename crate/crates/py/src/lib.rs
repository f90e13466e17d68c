//! Python bindings for the compiler, simulator and reference interpreter.

use std::collections::BTreeMap;

use ccx_core::frontend::ast_tree;
use ccx_core::simulator::write_trace_csv;
use ccx_core::{
    emit_cain_xml, emit_crn_text, interpret as interpret_program, parse_cain_xml, parse_source, run_ensemble,
    simulate as simulate_crn, Diagnostic, RateConfig, SimConfig,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

pyo3::create_exception!(ccx, CompileError, pyo3::exceptions::PyException);

fn diagnostics(ds: Vec<Diagnostic>) -> PyErr {
    let lines: Vec<String> = ds.iter().map(ToString::to_string).collect();
    CompileError::new_err(lines.join("\n"))
}

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Numeric values of the fast, slow and veryslow rate tiers.
#[pyclass(name = "RateConfig", module = "ccx", from_py_object)]
#[derive(Clone)]
struct PyRateConfig {
    inner: RateConfig,
}

#[pymethods]
impl PyRateConfig {
    #[new]
    #[pyo3(signature = (fast = 1000.0, slow = 1.0, veryslow = 0.01))]
    fn new(fast: f64, slow: f64, veryslow: f64) -> PyResult<Self> {
        RateConfig::new(fast, slow, veryslow)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[getter]
    fn fast(&self) -> f64 {
        self.inner.fast
    }

    #[getter]
    fn slow(&self) -> f64 {
        self.inner.slow
    }

    #[getter]
    fn veryslow(&self) -> f64 {
        self.inner.veryslow
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            inner: self.inner.scaled(factor),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "RateConfig(fast={}, slow={}, veryslow={})",
            self.inner.fast, self.inner.slow, self.inner.veryslow
        )
    }
}

fn rates_or_default(rates: Option<PyRateConfig>) -> RateConfig {
    rates.map(|r| r.inner).unwrap_or_default()
}

/// Final observables of one simulation run.
#[pyclass(name = "Trajectory", module = "ccx", get_all)]
struct PyTrajectory {
    observed: Vec<String>,
    times: Vec<f64>,
    samples: Vec<Vec<u64>>,
    final_time: f64,
    final_counts: BTreeMap<String, u64>,
    steps: u64,
    stop: String,
    trace_csv: String,
}

#[pymethods]
impl PyTrajectory {
    fn __repr__(&self) -> String {
        format!(
            "Trajectory(stop={:?}, steps={}, final_time={:.3}, final={:?})",
            self.stop, self.steps, self.final_time, self.final_counts
        )
    }
}

/// Aggregated final observables over independent runs.
#[pyclass(name = "Ensemble", module = "ccx", get_all)]
struct PyEnsemble {
    runs: usize,
    observables: Vec<String>,
    histograms: Vec<BTreeMap<u64, usize>>,
    mode: Vec<u64>,
    mode_count: usize,
    quiescent_runs: usize,
    report: String,
}

#[pymethods]
impl PyEnsemble {
    fn mode_fraction(&self) -> f64 {
        self.mode_count as f64 / self.runs as f64
    }

    /// Mode as a `{observable: count}` dict.
    fn mode_dict(&self) -> BTreeMap<String, u64> {
        self.observables.iter().cloned().zip(self.mode.iter().copied()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Ensemble(runs={}, mode={:?}, mode_count={}, quiescent_runs={})",
            self.runs,
            self.mode_dict(),
            self.mode_count,
            self.quiescent_runs
        )
    }
}

/// A compiled reaction network.
#[pyclass(name = "Crn", module = "ccx")]
struct PyCrn {
    crn: ccx_core::Crn,
    rates: RateConfig,
}

#[pymethods]
impl PyCrn {
    #[getter]
    fn rates(&self) -> PyRateConfig {
        PyRateConfig { inner: self.rates }
    }

    /// `(name, initial_count, kind)` for every species, in id order.
    fn species(&self) -> Vec<(String, u64, &'static str)> {
        self.crn
            .species
            .iter()
            .map(|s| (s.name.clone(), s.initial_count, s.kind.as_str()))
            .collect()
    }

    /// `(label, reactants, products, tier, is_maintenance)` for every reaction.
    #[allow(clippy::type_complexity)]
    fn reactions(&self) -> Vec<(String, Vec<(String, u32)>, Vec<(String, u32)>, &'static str, bool)> {
        let side = |xs: &[(ccx_core::SpeciesId, u32)]| -> Vec<(String, u32)> {
            xs.iter().map(|&(s, n)| (self.crn.name(s).to_string(), n)).collect()
        };
        self.crn
            .reactions
            .iter()
            .map(|r| {
                (
                    r.label.clone(),
                    side(&r.reactants),
                    side(&r.products),
                    r.tier.as_str(),
                    r.is_maintenance,
                )
            })
            .collect()
    }

    #[getter]
    fn observables(&self) -> Vec<String> {
        self.crn.observables.iter().map(|&o| self.crn.name(o).to_string()).collect()
    }

    #[getter]
    fn num_species(&self) -> usize {
        self.crn.species.len()
    }

    #[getter]
    fn num_reactions(&self) -> usize {
        self.crn.reactions.len()
    }

    fn to_xml(&self) -> PyResult<String> {
        emit_cain_xml(&self.crn, &self.rates).map_err(value_error)
    }

    fn to_text(&self) -> PyResult<String> {
        emit_crn_text(&self.crn).map_err(value_error)
    }

    #[pyo3(signature = (seed = 0, horizon = 5000.0, max_steps = 5_000_000, observe = None, rates = None))]
    fn simulate(
        &self,
        py: Python<'_>,
        seed: u64,
        horizon: f64,
        max_steps: u64,
        observe: Option<Vec<String>>,
        rates: Option<PyRateConfig>,
    ) -> PyResult<PyTrajectory> {
        let config = SimConfig {
            seed,
            horizon,
            max_steps,
            rates: rates.map_or(self.rates, |r| r.inner),
            observe,
        };
        let crn = &self.crn;
        let t = py.detach(|| simulate_crn(crn, &config)).map_err(value_error)?;
        let observed: Vec<String> = t.observed.iter().map(|&s| crn.name(s).to_string()).collect();
        let trace_csv = write_trace_csv(crn, &t, &observed).map_err(value_error)?;
        Ok(PyTrajectory {
            samples: (0..t.len()).map(|i| t.sample(i).to_vec()).collect(),
            final_counts: crn
                .observables
                .iter()
                .map(|&o| (crn.name(o).to_string(), t.final_count(o)))
                .collect(),
            observed,
            times: t.times,
            final_time: t.final_time,
            steps: t.steps,
            stop: t.stop.as_str().to_string(),
            trace_csv,
        })
    }

    #[pyo3(signature = (runs = 100, seed = 0, horizon = 5000.0, max_steps = 5_000_000, rates = None))]
    fn run_ensemble(
        &self,
        py: Python<'_>,
        runs: usize,
        seed: u64,
        horizon: f64,
        max_steps: u64,
        rates: Option<PyRateConfig>,
    ) -> PyResult<PyEnsemble> {
        let config = SimConfig {
            seed,
            horizon,
            max_steps,
            rates: rates.map_or(self.rates, |r| r.inner),
            observe: None,
        };
        let crn = &self.crn;
        let s = py.detach(|| run_ensemble(crn, &config, runs)).map_err(value_error)?;
        Ok(PyEnsemble {
            report: s.report(),
            runs: s.runs,
            observables: s.observables,
            histograms: s.histograms,
            mode: s.mode,
            mode_count: s.mode_count,
            quiescent_runs: s.quiescent_runs,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Crn(species={}, reactions={}, observables={:?})",
            self.crn.species.len(),
            self.crn.reactions.len(),
            self.observables()
        )
    }
}

/// `LINE:KIND:LEXEME` strings for every token.
#[pyfunction]
fn tokenize(source: &str) -> PyResult<Vec<String>> {
    ccx_core::tokenize(source)
        .map(|ts| ts.iter().map(ToString::to_string).collect())
        .map_err(|d| diagnostics(vec![d]))
}

/// S-expression rendering of the parsed program.
#[pyfunction]
fn ast(source: &str) -> PyResult<String> {
    parse_source(source)
        .map(|p| ast_tree(&p))
        .map_err(|d| diagnostics(vec![d]))
}

/// Final variable values from the reference interpreter.
#[pyfunction]
fn interpret(source: &str) -> PyResult<BTreeMap<String, u64>> {
    let program = parse_source(source).map_err(|d| diagnostics(vec![d]))?;
    let env = interpret_program(&program).map_err(|d| diagnostics(vec![d]))?;
    Ok(env.into_iter().collect())
}

#[pyfunction]
#[pyo3(signature = (source, rates = None))]
fn compile(source: &str, rates: Option<PyRateConfig>) -> PyResult<PyCrn> {
    let rates = rates_or_default(rates);
    let crn = ccx_core::compile_source(source, &rates).map_err(diagnostics)?;
    Ok(PyCrn { crn, rates })
}

/// Loads a network and its rates from an emitted XML document.
#[pyfunction]
fn parse_xml(text: &str) -> PyResult<PyCrn> {
    let (crn, rates) = parse_cain_xml(text).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(PyCrn { crn, rates })
}

#[pymodule]
fn ccx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CompileError", m.py().get_type::<CompileError>())?;
    m.add_class::<PyRateConfig>()?;
    m.add_class::<PyCrn>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(ast, m)?)?;
    m.add_function(wrap_pyfunction!(interpret, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(parse_xml, m)?)?;
    Ok(())
}
