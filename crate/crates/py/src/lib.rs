//! Python bindings: exposes search spaces, TPE optimization, the grouped
//! sequential strategy, the benchmark harness and the timing study as the
//! `gsos` extension module.
//!
//! Configurations cross the boundary as plain dicts (float, int or str
//! values); objectives are Python callables taking such a dict and
//! returning a loss (lower is better).

use std::time::Instant;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use gsos_core::gsos::{gsos_optimize as run_gsos, GroupPlan, ImportanceTable};
use gsos_core::harness;
use gsos_core::objectives::{EvalResult, Objective, ObjectiveError, SurrogateCnn};
use gsos_core::space::{self, Configuration, ParamValue};
use gsos_core::tpe::{self, Observation, OptimizeError, TpeSettings};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn value_to_py<'py>(py: Python<'py>, v: &ParamValue) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        ParamValue::Float(x) => x.into_pyobject(py)?.into_any(),
        ParamValue::Int(x) => x.into_pyobject(py)?.into_any(),
        ParamValue::Cat(s) => s.into_pyobject(py)?.into_any(),
    })
}

fn config_to_dict<'py>(py: Python<'py>, config: &Configuration) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    for (name, value) in config.iter() {
        dict.set_item(name, value_to_py(py, value)?)?;
    }
    Ok(dict)
}

fn dict_to_config(dict: &Bound<'_, PyDict>) -> PyResult<Configuration> {
    let mut config = Configuration::new();
    for (key, value) in dict.iter() {
        let name: String = key.extract()?;
        let v = if let Ok(s) = value.extract::<String>() {
            ParamValue::Cat(s)
        } else if let Ok(i) = value.extract::<i64>() {
            if value.extract::<bool>().is_ok() {
                return Err(PyValueError::new_err(format!("parameter `{name}`: bool is not a parameter value")));
            }
            ParamValue::Int(i)
        } else if let Ok(f) = value.extract::<f64>() {
            ParamValue::Float(f)
        } else {
            return Err(PyValueError::new_err(format!(
                "parameter `{name}`: expected float, int or str"
            )));
        };
        config.set(&name, v);
    }
    Ok(config)
}

fn observation_to_dict<'py>(py: Python<'py>, o: &Observation) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("config", config_to_dict(py, &o.config)?)?;
    dict.set_item("value", o.value)?;
    dict.set_item("iteration", o.iteration)?;
    dict.set_item("phase", o.phase.to_string())?;
    dict.set_item("simulated_eval_seconds", o.simulated_eval_seconds)?;
    dict.set_item("tpe_seconds", o.tpe_seconds)?;
    Ok(dict)
}

fn history_to_list<'py>(py: Python<'py>, history: &[Observation]) -> PyResult<Bound<'py, PyList>> {
    let items = history
        .iter()
        .map(|o| observation_to_dict(py, o))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

fn optimize_err(err: OptimizeError) -> PyErr {
    PyRuntimeError::new_err(err.to_string())
}

/// A search space over named hyperparameters.
#[pyclass(name = "SearchSpace")]
struct PySearchSpace {
    inner: space::SearchSpace,
}

#[pymethods]
impl PySearchSpace {
    /// The built-in 10-parameter CNN space.
    #[staticmethod]
    fn cnn() -> Self {
        PySearchSpace { inner: space::cnn_search_space() }
    }

    /// `d` continuous parameters `x1..xd` on `[low, high]`.
    #[staticmethod]
    fn continuous(d: usize, low: f64, high: f64) -> Self {
        PySearchSpace { inner: space::continuous_space(d, low, high) }
    }

    /// Load a space from a TOML file (one record per parameter).
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = gsos_core::config_file::load_space(std::path::Path::new(path))
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PySearchSpace { inner })
    }

    fn param_names(&self) -> Vec<String> {
        self.inner.params().iter().map(|p| p.name().to_owned()).collect()
    }

    fn default_config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        config_to_dict(py, &space::default_config(&self.inner))
    }

    /// One uniform (log-uniform for log-scaled parameters) prior draw.
    fn sample_prior<'py>(&self, py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let mut rng = StdRng::seed_from_u64(seed);
        config_to_dict(py, &self.inner.sample_prior(&mut rng))
    }

    /// Raises ValueError listing every violation.
    fn validate(&self, config: &Bound<'_, PyDict>) -> PyResult<()> {
        let config = dict_to_config(config)?;
        space::validate(&config, &self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("SearchSpace({})", self.param_names().join(", "))
    }
}

/// Adapter running a Python callable as an objective.
struct PyObjective<'py> {
    py: Python<'py>,
    callable: Bound<'py, PyAny>,
}

impl Objective for PyObjective<'_> {
    fn evaluate(&mut self, config: &Configuration) -> Result<EvalResult, ObjectiveError> {
        let started = Instant::now();
        let dict = config_to_dict(self.py, config)
            .map_err(|e| ObjectiveError::Failed(e.to_string()))?;
        let value: f64 = self
            .callable
            .call1((dict,))
            .and_then(|v| v.extract())
            .map_err(|e| ObjectiveError::Failed(e.to_string()))?;
        Ok(EvalResult {
            value,
            simulated_eval_seconds: 0.0,
            wall_eval_seconds: started.elapsed().as_secs_f64(),
        })
    }
}

/// TPE over the full space. Returns (best_config, best_value, history).
#[pyfunction]
#[pyo3(signature = (objective, space, max_iter, seed, n_init=15, gamma=0.25, n_candidates=24))]
#[allow(clippy::too_many_arguments)]
fn optimize<'py>(
    py: Python<'py>,
    objective: Bound<'py, PyAny>,
    space: &PySearchSpace,
    max_iter: usize,
    seed: u64,
    n_init: usize,
    gamma: f64,
    n_candidates: usize,
) -> PyResult<(Bound<'py, PyDict>, f64, Bound<'py, PyList>)> {
    let settings = TpeSettings { n_init, gamma, n_candidates, max_iter };
    let mut rng = StdRng::seed_from_u64(seed);
    let mut obj = PyObjective { py, callable: objective };
    let run = tpe::optimize(&mut obj, &space.inner, &settings, &mut rng).map_err(optimize_err)?;
    Ok((
        config_to_dict(py, &run.best.config)?,
        run.best.value,
        history_to_list(py, &run.history)?,
    ))
}

/// Grouped sequential optimization with explicit groups and budgets.
/// Returns (x_optimal, best_value, history).
#[pyfunction]
#[pyo3(signature = (objective, space, groups, budgets, seed, gamma=0.25, n_candidates=24))]
#[allow(clippy::too_many_arguments)]
fn gsos_optimize<'py>(
    py: Python<'py>,
    objective: Bound<'py, PyAny>,
    space: &PySearchSpace,
    groups: Vec<Vec<String>>,
    budgets: Vec<usize>,
    seed: u64,
    gamma: f64,
    n_candidates: usize,
) -> PyResult<(Bound<'py, PyDict>, f64, Bound<'py, PyList>)> {
    let table = ImportanceTable::uniform(&space.inner);
    let plan = GroupPlan::new(groups, budgets, &table, &space.inner)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let defaults = space::default_config(&space.inner);
    let template = TpeSettings { gamma, n_candidates, ..TpeSettings::new(plan.total_iterations()) };
    let mut rng = StdRng::seed_from_u64(seed);
    let mut obj = PyObjective { py, callable: objective };
    let run = run_gsos(&mut obj, &space.inner, &plan, &defaults, &template, &mut rng)
        .map_err(optimize_err)?;
    let best = tpe::best_observation(&run.history).expect("non-empty history");
    Ok((
        config_to_dict(py, &run.x_optimal)?,
        best.value,
        history_to_list(py, &run.history)?,
    ))
}

/// Runs both strategies on a built-in objective and returns the summary.
#[pyfunction]
#[pyo3(signature = (objective_id="surrogate_cnn", rounds=5, iters=100, seed=42))]
fn compare<'py>(
    py: Python<'py>,
    objective_id: &str,
    rounds: usize,
    iters: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let err = |e: harness::HarnessError| PyRuntimeError::new_err(e.to_string());
    let grouped =
        harness::run_experiment(harness::Strategy::GroupedSequential, objective_id, rounds, iters, seed)
            .map_err(err)?;
    let simultaneous =
        harness::run_experiment(harness::Strategy::Simultaneous, objective_id, rounds, iters, seed)
            .map_err(err)?;
    let summary = harness::summarize(&grouped, &simultaneous).map_err(err)?;

    let stats = |s: &harness::StrategyStats| -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("avg_time_to_best_seconds", s.avg_time_to_best_seconds)?;
        d.set_item("avg_total_time_seconds", s.avg_total_time_seconds)?;
        d.set_item("avg_best_value", s.avg_best_value)?;
        Ok(d)
    };
    let out = PyDict::new(py);
    out.set_item("grouped_sequential", stats(&summary.grouped)?)?;
    out.set_item("simultaneous", stats(&summary.simultaneous)?)?;
    out.set_item("time_reduction_percent", summary.time_reduction_percent)?;
    out.set_item("value_change", summary.value_change)?;
    Ok(out)
}

/// Wall-clock TPE overhead per dimension count: list of (d, tpe_seconds).
#[pyfunction]
#[pyo3(signature = (dims, iters=100, delay=0.01))]
fn timing_study(dims: Vec<usize>, iters: usize, delay: f64) -> Vec<(usize, f64)> {
    harness::timing_study(&dims, iters, delay)
        .into_iter()
        .map(|row| (row.dims, row.tpe_seconds))
        .collect()
}

/// Loss of the surrogate CNN objective at a configuration.
#[pyfunction]
fn surrogate_cnn_loss(config: &Bound<'_, PyDict>) -> PyResult<f64> {
    let config = dict_to_config(config)?;
    let surrogate = SurrogateCnn::default();
    space::validate(&config, surrogate.space()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(surrogate.loss(&config))
}

/// Simulated training seconds of the surrogate CNN objective.
#[pyfunction]
fn surrogate_cnn_cost_seconds(config: &Bound<'_, PyDict>) -> PyResult<f64> {
    let config = dict_to_config(config)?;
    let surrogate = SurrogateCnn::default();
    space::validate(&config, surrogate.space()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(surrogate.cost_seconds(&config))
}

/// The recorded global minimizer of the surrogate: (config, loss).
#[pyfunction]
fn surrogate_cnn_minimizer(py: Python<'_>) -> PyResult<(Bound<'_, PyDict>, f64)> {
    let definition = SurrogateCnn::default().definition().clone();
    Ok((config_to_dict(py, &definition.minimizer.to_config())?, definition.minimizer.loss))
}

#[pymodule]
fn gsos(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySearchSpace>()?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(gsos_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(timing_study, m)?)?;
    m.add_function(wrap_pyfunction!(surrogate_cnn_loss, m)?)?;
    m.add_function(wrap_pyfunction!(surrogate_cnn_cost_seconds, m)?)?;
    m.add_function(wrap_pyfunction!(surrogate_cnn_minimizer, m)?)?;
    Ok(())
}
