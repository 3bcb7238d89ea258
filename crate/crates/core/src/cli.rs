//! The `qsearch` command line, runnable in-process through [`run_command`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::clustersim::write_timeline_csv;
use crate::experiment::{
    compare, compare_csv, generate_dataset, probabilities_csv, run_cluster, ClusterConfig, ExperimentConfig, Preset,
    SearchInput,
};
use crate::orchestrator::run;
use crate::{Algorithm, Error, RunMode, SearchOptions, SearchTrace};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_EMPTY_RESULT: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "qsearch", version, about = "Grover-based database search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded dataset as JSON.
    Gen {
        #[command(flatten)]
        data: DataArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one algorithm and print a summary line.
    Search {
        #[arg(long, default_value = "resaqus")]
        algo: Algorithm,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Trace JSON destination.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Keep per-iteration probabilities in the trace.
        #[arg(long)]
        with_probs: bool,
    },
    /// Simulate the reference task mix on a worker pool.
    Cluster {
        #[arg(long, default_value = "resaqus")]
        algo: Algorithm,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 3)]
        workers: usize,
        #[arg(long, default_value_t = 12)]
        capacity: usize,
        #[arg(long)]
        horizon: Option<usize>,
        /// Timeline CSV destination.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Utilization report JSON destination.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run every algorithm on one dataset and print a CSV table.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-state probability CSV for every iteration.
    Probs {
        #[arg(long, default_value = "resaqus")]
        algo: Algorithm,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long, conflicts_with_all = ["input", "items"])]
    preset: Option<Preset>,
    /// Dataset JSON produced by `gen`.
    #[arg(long, conflicts_with = "items")]
    input: Option<PathBuf>,
    #[arg(long, requires_all = ["targets", "distinct"])]
    items: Option<usize>,
    /// Records carrying the target value.
    #[arg(long)]
    targets: Option<usize>,
    #[arg(long)]
    distinct: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DataArgs {
    fn load(&self, default: Option<Preset>) -> Result<SearchInput, Error> {
        if let Some(p) = self.preset {
            return p.dataset();
        }
        if let Some(path) = &self.input {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
            return SearchInput::from_json(&text);
        }
        match (self.items, self.targets, self.distinct) {
            (Some(items), Some(targets), Some(distinct)) => {
                generate_dataset(&ExperimentConfig::new(items, targets, distinct, self.seed))
            }
            _ => match default {
                Some(p) => p.dataset(),
                None => Err(Error::InvalidArgument(
                    "give --preset, --input, or --items/--targets/--distinct".into(),
                )),
            },
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Exact probabilities (the default).
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    /// Sample this many shots per invocation batch.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0, requires = "shots")]
    sample_seed: u64,
    #[arg(long, default_value_t = 10)]
    max_iters: usize,
    /// GSearch reporting threshold.
    #[arg(long, default_value_t = 0.01)]
    threshold: f64,
    /// IQuCS multiple of the mean probability.
    #[arg(long)]
    threshold_mult: Option<f64>,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        let mode = match self.shots {
            Some(shots) if !self.exact => RunMode::Sampled {
                shots,
                seed: self.sample_seed,
            },
            _ => RunMode::Exact,
        };
        SearchOptions {
            mode,
            max_iterations: self.max_iters,
            threshold: self.threshold,
            threshold_multiplier: self.threshold_mult.unwrap_or(1.0),
            ..SearchOptions::default()
        }
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("cannot write output: {e}"))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io_error),
    }
}

fn trace_json(trace: &SearchTrace) -> String {
    serde_json::to_string_pretty(trace).expect("trace serializes") + "\n"
}

fn summary(trace: &SearchTrace) -> String {
    format!(
        "algorithm={} iterations={} cqc={} accuracy={:?} converged={} qubits={}",
        trace.algorithm,
        trace.records.len(),
        trace.cqc,
        trace.accuracy,
        trace.converged,
        trace.qubit_sequence().iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    )
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Error> {
    match cli.command {
        Command::Gen { data, output } => {
            let input = data.load(None)?;
            emit(output.as_deref(), &input.to_json(), out)
        }
        Command::Search {
            algo,
            data,
            search,
            output,
            with_probs,
        } => {
            let input = data.load(Some(Preset::Exp1))?;
            let opts = SearchOptions {
                keep_probabilities: with_probs,
                ..search.options()
            };
            let result = run(algo, &input.items, &input.target_values, &opts);
            let trace = match &result {
                Ok(t) => t,
                Err(Error::EmptyResult { trace, .. }) => trace,
                Err(_) => return result.map(|_| ()),
            };
            if let Some(path) = &output {
                emit(Some(path), &trace_json(trace), out)?;
            } else if result.is_err() {
                // partial trace still goes somewhere
                err.write_all(trace_json(trace).as_bytes()).map_err(io_error)?;
            }
            if result.is_ok() {
                writeln!(out, "{}", summary(trace)).map_err(io_error)?;
            }
            result.map(|_| ())
        }
        Command::Cluster {
            algo,
            search,
            workers,
            capacity,
            horizon,
            output,
            report,
        } => {
            let cfg = ClusterConfig {
                algorithm: algo,
                workers,
                capacity,
                horizon,
                threshold_multiplier: search.threshold_mult,
                ..ClusterConfig::default()
            };
            let result = run_cluster(&cfg, &search.options())?;
            let mut csv = Vec::new();
            write_timeline_csv(&mut csv, &result.timelines, result.report.horizon).expect("write to buffer");
            let csv = String::from_utf8(csv).expect("ascii csv");
            let report_text = serde_json::to_string_pretty(&result.report).expect("report serializes") + "\n";
            match (&output, &report) {
                (None, None) => {
                    emit(None, &csv, out)?;
                    emit(None, &report_text, out)?;
                }
                _ => {
                    emit(output.as_deref(), &csv, out)?;
                    emit(report.as_deref(), &report_text, out)?;
                }
            }
            Ok(())
        }
        Command::Compare { data, search, output } => {
            let input = data.load(Some(Preset::Exp1))?;
            let opts = SearchOptions {
                keep_probabilities: false,
                ..search.options()
            };
            emit(output.as_deref(), &compare_csv(&compare(&input, &opts)?), out)
        }
        Command::Probs {
            algo,
            data,
            search,
            output,
        } => {
            let input = data.load(Some(Preset::Exp1))?;
            let trace = match run(algo, &input.items, &input.target_values, &search.options()) {
                Ok(t) => t,
                Err(Error::EmptyResult { trace, .. }) => *trace,
                Err(e) => return Err(e),
            };
            emit(output.as_deref(), &probabilities_csv(&trace), out)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Errors go to `err` as a one-line JSON envelope.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return e.exit_code() as u8;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let mut envelope = json!({ "error": e.kind(), "message": e.to_string() });
            if let Error::EmptyResult { iteration, .. } = &e {
                envelope["iteration"] = json!(iteration);
            }
            let _ = writeln!(err, "{envelope}");
            match e {
                Error::EmptyResult { .. } => EXIT_EMPTY_RESULT,
                Error::InfeasibleTask { .. } => EXIT_INFEASIBLE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Run {
        code: u8,
        stdout: String,
        stderr: String,
    }

    fn qsearch(args: &[&str]) -> Run {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_command(std::iter::once("qsearch").chain(args.iter().copied()), &mut out, &mut err);
        Run {
            code,
            stdout: String::from_utf8(out).unwrap(),
            stderr: String::from_utf8(err).unwrap(),
        }
    }

    fn envelope(run: &Run) -> serde_json::Value {
        serde_json::from_str(run.stderr.lines().last().unwrap()).unwrap()
    }

    #[test]
    fn gen_is_byte_identical_and_parses() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        for p in [&a, &b] {
            let run = qsearch(&["gen", "--items", "15", "--targets", "5", "--distinct", "11", "--seed", "1", "-o", p.to_str().unwrap()]);
            assert_eq!(run.code, 0);
        }
        let text = fs::read_to_string(&a).unwrap();
        assert_eq!(text, fs::read_to_string(&b).unwrap());
        assert_eq!(SearchInput::from_json(&text).unwrap().items.len(), 15);

        let run = qsearch(&["search", "--algo", "resaqus", "--input", a.to_str().unwrap()]);
        assert_eq!(run.code, 0);
        assert!(run.stdout.contains("cqc=12"));
    }

    #[test]
    fn gen_rejects_impossible_shapes() {
        let run = qsearch(&["gen", "--items", "5", "--targets", "6", "--distinct", "2"]);
        assert_eq!(run.code, EXIT_FAILURE);
        assert_eq!(envelope(&run)["error"], "invalid_argument");
    }

    #[test]
    fn usage_errors_use_clap_codes() {
        assert_eq!(qsearch(&["search", "--algo", "bogus"]).code, 2);
        assert_eq!(qsearch(&["search", "--exact", "--shots", "10"]).code, 2);
        let help = qsearch(&["--help"]);
        assert_eq!(help.code, 0);
        assert!(help.stdout.contains("compare"));
    }

    #[test]
    fn search_summary_and_trace() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.json");
        let args = ["search", "--algo", "resaqus", "--preset", "exp1", "--exact", "--with-probs", "-o"];
        let run = qsearch(&[&args[..], &[path.to_str().unwrap()]].concat());
        assert_eq!(run.code, 0);
        assert!(run.stdout.contains("iterations=2 cqc=12 accuracy=1.0"), "{}", run.stdout);
        let text = fs::read_to_string(&path).unwrap();
        let trace: SearchTrace = serde_json::from_str(&text).unwrap();
        assert_eq!(trace.qubit_sequence(), vec![8, 4]);
        assert!(trace.records.iter().all(|r| r.probabilities.is_some()));

        let path2 = dir.path().join("trace2.json");
        qsearch(&[&args[..], &[path2.to_str().unwrap()]].concat());
        assert_eq!(text, fs::read_to_string(&path2).unwrap());
    }

    #[test]
    fn compare_table() {
        let run = qsearch(&["compare", "--preset", "exp3", "--exact"]);
        assert_eq!(run.code, 0);
        assert!(run.stdout.starts_with("algorithm,status,iterations,invocations,qubits,cqc,accuracy,"));
        let cqc: Vec<(&str, &str)> = run
            .stdout
            .lines()
            .skip(1)
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                (cols[0], cols[5])
            })
            .collect();
        assert_eq!(cqc[0], ("gsearch", "132"));
        assert_eq!(cqc[2], ("resaqus", "18"));
    }

    #[test]
    fn empty_result_exits_with_partial_trace() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.json");
        let run = qsearch(&["search", "--algo", "iqucs", "--preset", "exp1", "--threshold-mult", "50", "-o", path.to_str().unwrap()]);
        assert_eq!(run.code, EXIT_EMPTY_RESULT);
        assert_eq!(envelope(&run)["error"], "empty_result");
        let trace: SearchTrace = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert!(trace.records[0].survivors.is_empty());

        // without -o the partial trace precedes the envelope on stderr
        let run = qsearch(&["search", "--algo", "iqucs", "--preset", "exp1", "--threshold-mult", "50"]);
        let body = &run.stderr[..run.stderr.trim_end().rfind('\n').unwrap()];
        assert!(serde_json::from_str::<SearchTrace>(body).is_ok());
    }

    #[test]
    fn infeasible_cluster_capacity() {
        let run = qsearch(&["cluster", "--algo", "gsearch", "--capacity", "10"]);
        assert_eq!(run.code, EXIT_INFEASIBLE);
        assert_eq!(envelope(&run)["error"], "infeasible_task");
    }

    #[test]
    fn cluster_writes_csv_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("t.csv");
        let report = dir.path().join("r.json");
        let run = qsearch(&["cluster", "--algo", "resaqus", "-o", csv.to_str().unwrap(), "--report", report.to_str().unwrap()]);
        assert_eq!(run.code, 0);
        let rows = fs::read_to_string(&csv).unwrap();
        assert_eq!(rows.lines().next(), Some("worker_id,slot,task_id,qubits"));
        assert_eq!(rows.lines().count(), 1 + 3 * 8);
        let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(r["total_active_slots"], 24);
    }

    #[test]
    fn probs_csv_has_six_decimals() {
        let run = qsearch(&["probs", "--preset", "exp1"]);
        assert_eq!(run.code, 0);
        assert_eq!(run.stdout.lines().count(), 1 + 256 + 16);
        let p = run.stdout.lines().nth(1).unwrap().split(',').nth(6).unwrap();
        assert_eq!(p.split('.').nth(1).unwrap().len(), 6);
    }
}
