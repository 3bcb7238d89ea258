//! End-to-end search drivers and their resource accounting.
//!
//! All three algorithms share one iteration step: compress values, size the
//! registers, encode, run Grover, keep only the labels of real records, pick
//! survivors, decode. They differ in how many invocations each iteration uses
//! and in how survivors are picked:
//!
//! | algorithm | invocations            | survivors                          |
//! |-----------|------------------------|------------------------------------|
//! | RESAQuS   | 1                      | high cluster of two-centroid split |
//! | IQuCS     | 1 on odd, 2 on even j  | `p ≥ multiplier × mean`            |
//! | GSearch   | optimal count, once    | `p ≥ threshold`                    |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoding::{
    compute_qubits, decode, generate_binary_pairs, maintain_indexes, relabel, update_indexes,
    update_values, DataPoint, Dataset, EncodedProblem,
};
use crate::error::{Error, Result};
use crate::filter::{filter, DEFAULT_MAX_PASSES};
use crate::grover::{grover_run, optimal_invocations, GroverRun, Oracle, RunMode};
use crate::statevector::ProbabilityMap;

/// Relative slack when comparing a probability against a threshold, so that
/// states sitting exactly on it are not lost to rounding.
const THRESHOLD_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    GSearch,
    IQuCS,
    RESAQuS,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::GSearch, Algorithm::IQuCS, Algorithm::RESAQuS];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GSearch => "gsearch",
            Algorithm::IQuCS => "iqucs",
            Algorithm::RESAQuS => "resaqus",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    #[serde(rename = "j")]
    pub iteration: usize,
    pub qubits: usize,
    pub index_bits: usize,
    pub value_bits: usize,
    pub invocations: usize,
    /// Original index → value id at this iteration.
    pub survivors: Vec<DataPoint>,
    /// Full measured distribution over all `2^qubits` labels (exact mode) or
    /// the observed labels (sampled mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<ProbabilityMap>,
    /// Labels of the records carrying a target value id.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marked: Vec<usize>,
}

impl IterationRecord {
    pub fn cost(&self) -> usize {
        self.qubits * self.invocations
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub algorithm: Algorithm,
    #[serde(rename = "iterations")]
    pub records: Vec<IterationRecord>,
    pub cqc: usize,
    /// Reported `(original index, original value)` pairs.
    #[serde(rename = "final")]
    pub final_pairs: Vec<DataPoint>,
    pub accuracy: f64,
    pub converged: bool,
}

impl SearchTrace {
    pub fn qubit_sequence(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.qubits).collect()
    }

    pub fn invocation_sequence(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.invocations).collect()
    }

    pub fn total_invocations(&self) -> usize {
        self.records.iter().map(|r| r.invocations).sum()
    }

    pub fn found_indexes(&self) -> BTreeSet<u64> {
        self.final_pairs.iter().map(|d| d.index).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub mode: RunMode,
    /// Iteration cap `J` for the iterative algorithms.
    pub max_iterations: usize,
    pub max_passes: usize,
    /// GSearch reporting threshold.
    pub threshold: f64,
    /// IQuCS threshold as a multiple of the mean probability.
    pub threshold_multiplier: f64,
    /// Runs GSearch with this many invocations instead of the optimal count.
    pub gsearch_invocations: Option<usize>,
    /// Keep the measured distribution on every iteration record.
    pub keep_probabilities: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            mode: RunMode::Exact,
            max_iterations: 10,
            max_passes: DEFAULT_MAX_PASSES,
            threshold: 0.01,
            threshold_multiplier: 1.0,
            gsearch_invocations: None,
            keep_probabilities: true,
        }
    }
}

/// Invocations used at iteration `j` (1-based). `space` and `targets` are
/// only consulted for GSearch.
pub fn invocation_schedule(algorithm: Algorithm, iteration: usize, space: u64, targets: u64) -> Result<usize> {
    match algorithm {
        Algorithm::RESAQuS => Ok(1),
        Algorithm::IQuCS => Ok(if iteration % 2 == 1 { 1 } else { 2 }),
        Algorithm::GSearch => optimal_invocations(space, targets),
    }
}

/// `Σ invocations × qubits` over the trace.
pub fn cqc(trace: &SearchTrace) -> usize {
    trace.records.iter().map(IterationRecord::cost).sum()
}

/// Fraction of `truth` present among the reported indexes.
pub fn accuracy(trace: &SearchTrace, truth: &BTreeSet<u64>) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let found = trace.found_indexes();
    truth.intersection(&found).count() as f64 / truth.len() as f64
}

enum Selection {
    Cluster,
    AboveMean(f64),
    AboveThreshold(f64),
}

struct Step {
    problem: EncodedProblem,
    run: GroverRun,
    /// Surviving `(current index, value id)` pairs.
    survivors: Vec<(u64, u64)>,
}

fn seed_for(mode: RunMode, iteration: usize) -> RunMode {
    match mode {
        RunMode::Exact => RunMode::Exact,
        RunMode::Sampled { shots, seed } => RunMode::Sampled {
            shots,
            seed: seed.wrapping_add(iteration as u64 - 1),
        },
    }
}

fn keep_at_least(probs: &ProbabilityMap, threshold: f64) -> BTreeSet<usize> {
    let floor = threshold - threshold.abs() * THRESHOLD_REL_TOL;
    probs.iter().filter(|&(_, p)| p >= floor).map(|(k, _)| k).collect()
}

fn quantum_step(
    data: &Dataset,
    target_ids: &[u64],
    invocations: usize,
    iteration: usize,
    selection: Selection,
    opts: &SearchOptions,
) -> Result<Step> {
    let widths = compute_qubits(data);
    let problem = generate_binary_pairs(data, widths, target_ids)?;
    let oracle = Oracle::from_indices(problem.marked.iter().copied(), widths.total())?;
    let run = grover_run(&oracle, invocations, seed_for(opts.mode, iteration))?;

    let candidates = run.result.restrict(&problem.universe);
    let kept = if candidates.is_empty() {
        BTreeSet::new()
    } else {
        match selection {
            Selection::Cluster => filter(&candidates, opts.max_passes)?,
            Selection::AboveMean(mult) => keep_at_least(&candidates, mult * candidates.mean()),
            Selection::AboveThreshold(t) => keep_at_least(&candidates, t),
        }
    };
    let survivors = decode(&candidates.restrict(&kept), widths)?;
    Ok(Step {
        problem,
        run,
        survivors,
    })
}

fn record(iteration: usize, step: &Step, survivors: &[(u64, u64)], opts: &SearchOptions) -> IterationRecord {
    IterationRecord {
        iteration,
        qubits: step.problem.num_qubits(),
        index_bits: step.problem.widths.index_bits,
        value_bits: step.problem.widths.value_bits,
        invocations: step.run.invocations,
        survivors: survivors.iter().map(|&(i, v)| DataPoint::new(i, v)).collect(),
        probabilities: opts.keep_probabilities.then(|| step.run.result.clone()),
        marked: if opts.keep_probabilities {
            step.problem.marked.iter().copied().collect()
        } else {
            Vec::new()
        },
    }
}

fn validate(data: &Dataset, targets: &[u64], opts: &SearchOptions) -> Result<Vec<u64>> {
    if data.is_empty() {
        return Err(Error::invalid("dataset is empty"));
    }
    let mut ordered = Vec::new();
    for &t in targets {
        if !ordered.contains(&t) {
            ordered.push(t);
        }
    }
    if ordered.is_empty() {
        return Err(Error::invalid("no target values given"));
    }
    if let Some(t) = ordered.iter().find(|t| !data.values().any(|v| v == **t)) {
        return Err(Error::invalid(format!("target value {t} does not occur in the dataset")));
    }
    if opts.max_iterations == 0 {
        return Err(Error::invalid("max_iterations must be at least 1"));
    }
    Ok(ordered)
}

fn finish(
    algorithm: Algorithm,
    records: Vec<IterationRecord>,
    survivors: &[(u64, u64)],
    original: &Dataset,
    targets: &[u64],
    converged: bool,
) -> Result<SearchTrace> {
    let final_pairs = survivors
        .iter()
        .map(|&(idx, _)| {
            original
                .value_of(idx)
                .map(|v| DataPoint::new(idx, v))
                .ok_or_else(|| Error::Inconsistency(format!("index {idx} is not in the input dataset")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut trace = SearchTrace {
        algorithm,
        records,
        cqc: 0,
        final_pairs,
        accuracy: 0.0,
        converged,
    };
    trace.cqc = cqc(&trace);
    trace.accuracy = accuracy(&trace, &original.indexes_with_values(targets));
    Ok(trace)
}

fn as_set(map: &[(u64, u64)]) -> BTreeSet<(u64, u64)> {
    map.iter().copied().collect()
}

/// Shared loop for the two iterative algorithms.
fn run_iterative(data: &Dataset, targets: &[u64], algorithm: Algorithm, opts: &SearchOptions) -> Result<SearchTrace> {
    let targets = validate(data, targets, opts)?;
    let target_ids: Vec<u64> = (0..targets.len() as u64).collect();
    let selection = || match algorithm {
        Algorithm::IQuCS => Selection::AboveMean(opts.threshold_multiplier),
        _ => Selection::Cluster,
    };
    let empty = |iteration: usize, records: Vec<IterationRecord>| -> Error {
        let mut trace = SearchTrace {
            algorithm,
            records,
            cqc: 0,
            final_pairs: Vec::new(),
            accuracy: 0.0,
            converged: false,
        };
        trace.cqc = cqc(&trace);
        Error::EmptyResult {
            iteration,
            trace: Box::new(trace),
        }
    };

    let compressed = update_values(data, &targets);
    let k = invocation_schedule(algorithm, 1, 0, 0)?;
    let step = quantum_step(&compressed, &target_ids, k, 1, selection(), opts)?;
    let mut current = step.survivors.clone();
    let mut records = vec![record(1, &step, &current, opts)];
    if current.is_empty() {
        return Err(empty(1, records));
    }

    let mut previous: Vec<(u64, u64)> = Vec::new();
    let mut j = 1;
    while as_set(&previous) != as_set(&current) && j < opts.max_iterations {
        previous = current.clone();
        let mapping = update_indexes(&current);
        let fresh = Dataset::new(
            relabel(&current)
                .into_iter()
                .map(|(i, v)| DataPoint::new(i, v))
                .collect(),
        )?;
        let fresh = update_values(&fresh, &target_ids);
        j += 1;
        let k = invocation_schedule(algorithm, j, 0, 0)?;
        let step = quantum_step(&fresh, &target_ids, k, j, selection(), opts)?;
        current = maintain_indexes(&step.survivors, &mapping)?;
        records.push(record(j, &step, &current, opts));
        if current.is_empty() {
            return Err(empty(j, records));
        }
    }
    let converged = as_set(&previous) == as_set(&current);
    finish(algorithm, records, &current, data, &targets, converged)
}

/// Iterative search with one invocation per iteration and cluster-based
/// filtering. Stops when an iteration reproduces the previous survivors or
/// after `opts.max_iterations` iterations.
pub fn run_resaqus(data: &Dataset, targets: &[u64], opts: &SearchOptions) -> Result<SearchTrace> {
    run_iterative(data, targets, Algorithm::RESAQuS, opts)
}

/// Iterative baseline with the 1/2 invocation parity schedule and a
/// mean-relative threshold. Fails with [`Error::EmptyResult`] when an
/// iteration keeps nothing.
pub fn run_iqucs(data: &Dataset, targets: &[u64], opts: &SearchOptions) -> Result<SearchTrace> {
    if opts.threshold_multiplier.is_nan() || opts.threshold_multiplier <= 0.0 {
        return Err(Error::invalid("threshold multiplier must be positive"));
    }
    run_iterative(data, targets, Algorithm::IQuCS, opts)
}

/// Single Grover run at the optimal invocation count, reporting every record
/// at or above `opts.threshold`.
pub fn run_gsearch(data: &Dataset, targets: &[u64], opts: &SearchOptions) -> Result<SearchTrace> {
    let targets = validate(data, targets, opts)?;
    if !(opts.threshold > 0.0 && opts.threshold < 1.0) {
        return Err(Error::invalid("threshold must lie in (0, 1)"));
    }
    let target_ids: Vec<u64> = (0..targets.len() as u64).collect();
    let compressed = update_values(data, &targets);
    let widths = compute_qubits(&compressed);
    let k = match opts.gsearch_invocations {
        Some(0) => return Err(Error::invalid("GSearch needs at least one invocation")),
        Some(k) => k,
        None => {
            let marked = compressed.values().filter(|v| target_ids.contains(v)).count() as u64;
            invocation_schedule(Algorithm::GSearch, 1, 1u64 << widths.total(), marked)?
        }
    };
    let step = quantum_step(&compressed, &target_ids, k, 1, Selection::AboveThreshold(opts.threshold), opts)?;
    let records = vec![record(1, &step, &step.survivors, opts)];
    finish(Algorithm::GSearch, records, &step.survivors, data, &targets, true)
}

pub fn run(algorithm: Algorithm, data: &Dataset, targets: &[u64], opts: &SearchOptions) -> Result<SearchTrace> {
    match algorithm {
        Algorithm::GSearch => run_gsearch(data, targets, opts),
        Algorithm::IQuCS => run_iqucs(data, targets, opts),
        Algorithm::RESAQuS => run_resaqus(data, targets, opts),
    }
}
