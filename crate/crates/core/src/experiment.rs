//! Seeded dataset generation, the three reference presets, and the tabular
//! artifacts the CLI emits.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustersim::{plan_task, schedule, utilization, Policy, TaskPlan, UtilizationReport, WorkerTimeline};
use crate::encoding::{compute_qubits, DataPoint, Dataset, QubitWidths};
use crate::error::{Error, Result};
use crate::orchestrator::{run, Algorithm, SearchOptions, SearchTrace};

/// Shape of a generated search problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub items: usize,
    /// Records carrying one of the target values.
    pub target_multiplicity: usize,
    pub distinct_values: usize,
    /// How many distinct target values to draw.
    pub target_values: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(items: usize, target_multiplicity: usize, distinct_values: usize, seed: u64) -> Self {
        Self {
            items,
            target_multiplicity,
            distinct_values,
            target_values: 1,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let others = self.items.saturating_sub(self.target_multiplicity);
        let other_values = self.distinct_values.saturating_sub(self.target_values);
        let problem = if self.items == 0 {
            Some("at least one item is required".to_string())
        } else if self.target_values == 0 {
            Some("at least one target value is required".to_string())
        } else if self.target_multiplicity > self.items {
            Some(format!("{} targets exceed {} items", self.target_multiplicity, self.items))
        } else if self.target_multiplicity < self.target_values {
            Some(format!(
                "{} target records cannot carry {} target values",
                self.target_multiplicity, self.target_values
            ))
        } else if self.distinct_values < self.target_values {
            Some("fewer distinct values than target values".to_string())
        } else if self.distinct_values > self.items {
            Some(format!("{} distinct values exceed {} items", self.distinct_values, self.items))
        } else if others < other_values {
            Some(format!("{others} non-target records cannot hold {other_values} other values"))
        } else if others > 0 && other_values == 0 {
            Some(format!("{others} non-target records but no non-target values"))
        } else {
            None
        };
        problem.map_or(Ok(()), |p| Err(Error::invalid(p)))
    }
}

/// A dataset together with the values being searched for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchInput {
    pub items: Dataset,
    pub target_values: Vec<u64>,
}

impl SearchInput {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad dataset JSON: {e}")))
    }
}

/// Deterministic dataset with indexes `0..items`. Exactly
/// `target_multiplicity` records carry a target value and every other value
/// appears at least once.
pub fn generate_dataset(cfg: &ExperimentConfig) -> Result<SearchInput> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels: Vec<u64> = index::sample(&mut rng, 100 * cfg.distinct_values, cfg.distinct_values)
        .into_iter()
        .map(|v| v as u64)
        .collect();
    let (targets, others) = labels.split_at(cfg.target_values);

    let mut values = vec![0u64; cfg.items];
    let mut is_target = vec![false; cfg.items];
    let target_slots = index::sample(&mut rng, cfg.items, cfg.target_multiplicity).into_vec();
    for (n, &slot) in target_slots.iter().enumerate() {
        values[slot] = targets.get(n).copied().unwrap_or_else(|| targets[rng.gen_range(0..targets.len())]);
        is_target[slot] = true;
    }

    let rest: Vec<usize> = (0..cfg.items).filter(|&i| !is_target[i]).collect();
    let mut fill: Vec<u64> = others.to_vec();
    while fill.len() < rest.len() {
        fill.push(others[rng.gen_range(0..others.len())]);
    }
    fill.shuffle(&mut rng);
    for (slot, v) in rest.into_iter().zip(fill) {
        values[slot] = v;
    }

    Ok(SearchInput {
        items: Dataset::from_values(values),
        target_values: targets.to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Exp1,
    Exp2,
    Exp3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Exp1, Preset::Exp2, Preset::Exp3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Exp1 => "exp1",
            Preset::Exp2 => "exp2",
            Preset::Exp3 => "exp3",
        }
    }

    /// Items, target records, distinct values, and a pinned seed.
    pub fn config(self) -> ExperimentConfig {
        match self {
            Preset::Exp1 => ExperimentConfig::new(15, 5, 11, 1),
            Preset::Exp2 => ExperimentConfig::new(40, 15, 16, 2),
            Preset::Exp3 => ExperimentConfig::new(80, 20, 26, 3),
        }
    }

    /// Register widths of the first iteration.
    pub fn expected_widths(self) -> QubitWidths {
        match self {
            Preset::Exp1 => QubitWidths::new(4, 4),
            Preset::Exp2 => QubitWidths::new(6, 4),
            Preset::Exp3 => QubitWidths::new(7, 5),
        }
    }

    /// IQuCS multiplier for which the preset's run completes.
    pub fn feasible_multiplier(self) -> f64 {
        match self {
            Preset::Exp2 => 0.8,
            _ => 1.0,
        }
    }

    /// Generates the preset dataset and checks its widths.
    pub fn dataset(self) -> Result<SearchInput> {
        let input = generate_dataset(&self.config())?;
        let widths = compute_qubits(&input.items);
        if widths != self.expected_widths() {
            return Err(Error::Inconsistency(format!(
                "preset {} produced widths {widths:?}, expected {:?}",
                self.name(),
                self.expected_widths()
            )));
        }
        Ok(input)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown preset {s:?}")))
    }
}

/// Outcome of one algorithm in a comparison. `trace` is partial when
/// `error` is set.
#[derive(Clone, Debug)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub trace: SearchTrace,
    pub error: Option<&'static str>,
}

/// Runs every algorithm on `input`, one thread each.
pub fn compare(input: &SearchInput, opts: &SearchOptions) -> Result<Vec<CompareRow>> {
    let results: Vec<Result<CompareRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = Algorithm::ALL
            .into_iter()
            .map(|algorithm| {
                scope.spawn(move || match run(algorithm, &input.items, &input.target_values, opts) {
                    Ok(trace) => Ok(CompareRow {
                        algorithm,
                        trace,
                        error: None,
                    }),
                    Err(Error::EmptyResult { trace, .. }) => Ok(CompareRow {
                        algorithm,
                        trace: *trace,
                        error: Some("empty_result"),
                    }),
                    Err(e) => Err(e),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search thread panicked")).collect()
    });
    results.into_iter().collect()
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Fixed-column CSV for [`compare`] output. Reductions are relative to the
/// GSearch row.
pub fn compare_csv(rows: &[CompareRow]) -> String {
    let baseline = rows
        .iter()
        .find(|r| r.algorithm == Algorithm::GSearch)
        .map(|r| r.trace.cqc);
    let mut out = String::from("algorithm,status,iterations,invocations,qubits,cqc,accuracy,cqc_reduction_vs_gsearch\n");
    for r in rows {
        let reduction = match baseline {
            Some(b) if b > 0 => format!("{:.6}", 1.0 - r.trace.cqc as f64 / b as f64),
            _ => String::new(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{}",
            r.algorithm,
            r.error.unwrap_or("ok"),
            r.trace.records.len(),
            join(r.trace.invocation_sequence()),
            join(r.trace.qubit_sequence()),
            r.trace.cqc,
            r.trace.accuracy,
            reduction
        )
        .expect("write to string");
    }
    out
}

/// Per-state probabilities of every recorded iteration.
pub fn probabilities_csv(trace: &SearchTrace) -> String {
    let mut out = String::from("algorithm,iteration,invocations,state,index,value,probability,marked\n");
    for rec in &trace.records {
        let Some(probs) = &rec.probabilities else {
            continue;
        };
        let widths = QubitWidths::new(rec.index_bits, rec.value_bits);
        for (basis, p) in probs.iter() {
            let DataPoint { index, value } = widths.unpack(basis);
            writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{}",
                trace.algorithm,
                rec.iteration,
                rec.invocations,
                probs.bitstring(basis),
                index,
                value,
                p,
                u8::from(rec.marked.binary_search(&basis).is_ok())
            )
            .expect("write to string");
        }
    }
    out
}

/// The reference cluster workload: `copies` rounds of exp1, exp2, exp3.
#[derive(Clone, Debug)]
pub struct ClusterRun {
    pub traces: Vec<(String, SearchTrace)>,
    pub plans: Vec<TaskPlan>,
    pub timelines: Vec<WorkerTimeline>,
    pub report: UtilizationReport,
}

pub struct ClusterConfig {
    pub algorithm: Algorithm,
    pub workers: usize,
    pub capacity: usize,
    pub horizon: Option<usize>,
    pub copies: usize,
    /// IQuCS multiplier override; defaults to each preset's feasible value.
    pub threshold_multiplier: Option<f64>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::RESAQuS,
            workers: 3,
            capacity: 12,
            horizon: None,
            copies: 4,
            threshold_multiplier: None,
        }
    }
}

pub fn run_cluster(cfg: &ClusterConfig, base: &SearchOptions) -> Result<ClusterRun> {
    let mut per_preset = Vec::new();
    for preset in Preset::ALL {
        let input = preset.dataset()?;
        let opts = SearchOptions {
            threshold_multiplier: cfg.threshold_multiplier.unwrap_or(preset.feasible_multiplier()),
            keep_probabilities: false,
            ..base.clone()
        };
        per_preset.push((preset, run(cfg.algorithm, &input.items, &input.target_values, &opts)?));
    }
    let mut traces = Vec::new();
    let mut plans = Vec::new();
    for copy in 0..cfg.copies {
        for (preset, trace) in &per_preset {
            let id = format!("{}-{}", preset.name(), copy);
            plans.push(plan_task(id.clone(), trace, cfg.capacity)?);
            traces.push((id, trace.clone()));
        }
    }
    let timelines = schedule(&plans, cfg.workers, cfg.capacity, Policy::EarliestAvailable)?;
    let report = utilization(&timelines, cfg.horizon)?;
    Ok(ClusterRun {
        traces,
        plans,
        timelines,
        report,
    })
}
