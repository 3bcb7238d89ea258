use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qsearch::experiment::{generate_dataset as generate, run_cluster, ClusterConfig, ExperimentConfig, Preset, SearchInput};
use qsearch::filter::filter;
use qsearch::gates::{self, named_gate, GateKind};
use qsearch::grover::{self, build_oracle, grover_run};
use qsearch::{Algorithm, DataPoint, Dataset, Error, ProbabilityMap, RunMode, SearchOptions};

create_exception!(qsearch_py, QSearchError, PyException);
create_exception!(qsearch_py, EmptyResultError, QSearchError);
create_exception!(qsearch_py, InfeasibleTaskError, QSearchError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Capacity(_) => PyValueError::new_err(e.to_string()),
        Error::EmptyResult { ref trace, iteration } => {
            // args: (message, iteration, partial trace JSON)
            let trace = serde_json::to_string(trace).unwrap_or_default();
            EmptyResultError::new_err((e.to_string(), iteration, trace))
        }
        Error::InfeasibleTask { .. } => InfeasibleTaskError::new_err(e.to_string()),
        Error::Inconsistency(_) => QSearchError::new_err(e.to_string()),
    }
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| QSearchError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn gate(name: &str, theta: Option<f64>) -> PyResult<gates::GateMatrix> {
    let kind: GateKind = name.parse().map_err(to_py)?;
    named_gate(kind, theta).map_err(to_py)
}

fn mode(shots: Option<u64>, seed: u64) -> RunMode {
    shots.map_or(RunMode::Exact, |shots| RunMode::Sampled { shots, seed })
}

/// Row-major matrix of a catalog gate.
#[pyfunction]
#[pyo3(signature = (name, theta=None))]
fn gate_matrix(name: &str, theta: Option<f64>) -> PyResult<Vec<Vec<Complex64>>> {
    let g = gate(name, theta)?;
    Ok((0..g.dim()).map(|r| (0..g.dim()).map(|c| g.get(r, c)).collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (name, theta=None, tol=1e-12))]
fn is_unitary(name: &str, theta: Option<f64>, tol: f64) -> PyResult<bool> {
    Ok(gates::is_unitary(&gate(name, theta)?, tol))
}

#[pyclass(name = "Statevector")]
struct PyStatevector {
    inner: qsearch::Statevector,
}

#[pymethods]
impl PyStatevector {
    #[staticmethod]
    fn uniform(num_qubits: usize) -> PyResult<Self> {
        qsearch::Statevector::uniform_superposition(num_qubits)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn basis(num_qubits: usize, bitstring: &str) -> PyResult<Self> {
        let idx = qsearch::statevector::parse_bitstring(bitstring, num_qubits).map_err(to_py)?;
        qsearch::Statevector::basis_state(num_qubits, idx)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    #[pyo3(signature = (name, qubits, theta=None))]
    fn apply_gate(&mut self, name: &str, qubits: Vec<usize>, theta: Option<f64>) -> PyResult<()> {
        let g = gate(name, theta)?;
        self.inner.apply_gate(&g, &qubits).map_err(to_py)
    }

    fn phase_flip(&mut self, marked: Vec<String>) -> PyResult<()> {
        self.inner.phase_flip_bitstrings(&marked).map_err(to_py)
    }

    fn diffuse(&mut self) {
        self.inner.diffuse();
    }

    fn probabilities(&self) -> BTreeMap<String, f64> {
        self.inner.probabilities().to_bitstring_pairs().into_iter().collect()
    }

    fn sample(&self, shots: u64, seed: u64) -> PyResult<BTreeMap<String, u64>> {
        let counts = self.inner.sample(shots, seed).map_err(to_py)?;
        let n = self.inner.num_qubits();
        Ok(counts
            .iter()
            .map(|(k, c)| (qsearch::statevector::format_bitstring(k, n), c))
            .collect())
    }
}

#[pyfunction]
fn optimal_invocations(space: u64, targets: u64) -> PyResult<usize> {
    grover::optimal_invocations(space, targets).map_err(to_py)
}

/// `(per-target, per-non-target)` probability after `k` invocations.
#[pyfunction]
fn closed_form_probability(space: u64, targets: u64, k: usize) -> (f64, f64) {
    grover::closed_form_probability(space, targets, k)
}

/// Grover output over `num_qubits` with the given marked bitstrings.
#[pyfunction]
#[pyo3(signature = (marked, num_qubits, invocations, shots=None, seed=0))]
fn grover_probabilities(
    marked: Vec<String>,
    num_qubits: usize,
    invocations: usize,
    shots: Option<u64>,
    seed: u64,
) -> PyResult<BTreeMap<String, f64>> {
    let oracle = build_oracle(&marked, num_qubits).map_err(to_py)?;
    let run = grover_run(&oracle, invocations, mode(shots, seed)).map_err(to_py)?;
    Ok(run.result.to_bitstring_pairs().into_iter().collect())
}

/// Bitstrings in the high-probability cluster.
#[pyfunction(name = "filter")]
#[pyo3(signature = (probabilities, max_passes=100))]
fn filter_probabilities(probabilities: BTreeMap<String, f64>, max_passes: usize) -> PyResult<Vec<String>> {
    let pairs: Vec<(String, f64)> = probabilities.into_iter().collect();
    let map = ProbabilityMap::from_bitstrings(&pairs).map_err(to_py)?;
    let kept = filter(&map, max_passes).map_err(to_py)?;
    Ok(kept.into_iter().map(|b| map.bitstring(b)).collect())
}

/// `(index, value)` pairs and the target values.
type ItemsAndTargets = (Vec<(u64, u64)>, Vec<u64>);

fn input_to_py(input: SearchInput) -> ItemsAndTargets {
    (
        input.items.items().iter().map(|d| (d.index, d.value)).collect(),
        input.target_values,
    )
}

/// `(items, target_values)` with items as `(index, value)` pairs.
#[pyfunction]
fn generate_dataset(items: usize, targets: usize, distinct: usize, seed: u64) -> PyResult<ItemsAndTargets> {
    generate(&ExperimentConfig::new(items, targets, distinct, seed))
        .map(input_to_py)
        .map_err(to_py)
}

#[pyfunction]
fn preset_dataset(name: &str) -> PyResult<ItemsAndTargets> {
    let preset: Preset = name.parse().map_err(to_py)?;
    preset.dataset().map(input_to_py).map_err(to_py)
}

/// Runs one algorithm and returns its trace as a dict.
#[pyfunction]
#[pyo3(signature = (algorithm, items, targets, shots=None, seed=0, max_iterations=10, threshold=0.01, threshold_multiplier=1.0, with_probabilities=false))]
#[allow(clippy::too_many_arguments)]
fn search<'py>(
    py: Python<'py>,
    algorithm: &str,
    items: Vec<(u64, u64)>,
    targets: Vec<u64>,
    shots: Option<u64>,
    seed: u64,
    max_iterations: usize,
    threshold: f64,
    threshold_multiplier: f64,
    with_probabilities: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let algorithm: Algorithm = algorithm.parse().map_err(to_py)?;
    let data = Dataset::new(items.into_iter().map(|(i, v)| DataPoint::new(i, v)).collect())
        .map_err(to_py)?;
    let opts = SearchOptions {
        mode: mode(shots, seed),
        max_iterations,
        threshold,
        threshold_multiplier,
        keep_probabilities: with_probabilities,
        ..SearchOptions::default()
    };
    let trace = qsearch::orchestrator::run(algorithm, &data, &targets, &opts).map_err(to_py)?;
    json_to_py(py, &trace)
}

/// Reference 12-task workload on a worker pool; returns the utilization report.
#[pyfunction]
#[pyo3(signature = (algorithm, workers=3, capacity=12, horizon=None, threshold_multiplier=None))]
fn cluster<'py>(
    py: Python<'py>,
    algorithm: &str,
    workers: usize,
    capacity: usize,
    horizon: Option<usize>,
    threshold_multiplier: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let algorithm: Algorithm = algorithm.parse().map_err(to_py)?;
    let cfg = ClusterConfig {
        algorithm,
        workers,
        capacity,
        horizon,
        threshold_multiplier,
        ..ClusterConfig::default()
    };
    let result = run_cluster(&cfg, &SearchOptions::default()).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("report", json_to_py(py, &result.report)?)?;
    out.set_item("timelines", json_to_py(py, &result.timelines)?)?;
    Ok(out.into_any())
}

#[pymodule]
fn qsearch_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QSearchError", m.py().get_type::<QSearchError>())?;
    m.add("EmptyResultError", m.py().get_type::<EmptyResultError>())?;
    m.add("InfeasibleTaskError", m.py().get_type::<InfeasibleTaskError>())?;
    m.add_class::<PyStatevector>()?;
    m.add_function(wrap_pyfunction!(gate_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(is_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_invocations, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_probability, m)?)?;
    m.add_function(wrap_pyfunction!(grover_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(filter_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(preset_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    Ok(())
}
