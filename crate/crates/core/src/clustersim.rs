//! Slot-level simulation of a manager dispatching search tasks to a pool of
//! quantum workers.
//!
//! One slot is one Grover invocation. Classical post-processing between
//! iterations is free, so a task occupies exactly `Σ invocations` contiguous
//! slots on the worker it lands on.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orchestrator::SearchTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub qubits: usize,
    pub slots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskPlan {
    pub task_id: String,
    pub segments: Vec<Segment>,
}

impl TaskPlan {
    pub fn slots(&self) -> usize {
        self.segments.iter().map(|s| s.slots).sum()
    }

    pub fn cqc(&self) -> usize {
        self.segments.iter().map(|s| s.slots * s.qubits).sum()
    }

    pub fn peak_qubits(&self) -> usize {
        self.segments.iter().map(|s| s.qubits).max().unwrap_or(0)
    }
}

/// One `(qubits, invocations)` segment per iteration of `trace`.
pub fn plan_task(task_id: impl Into<String>, trace: &SearchTrace, capacity: usize) -> Result<TaskPlan> {
    let plan = TaskPlan {
        task_id: task_id.into(),
        segments: trace
            .records
            .iter()
            .map(|r| Segment {
                qubits: r.qubits,
                slots: r.invocations,
            })
            .collect(),
    };
    if plan.segments.is_empty() || plan.segments.iter().any(|s| s.slots == 0) {
        return Err(Error::invalid(format!("task {} has an empty segment", plan.task_id)));
    }
    let peak = plan.peak_qubits();
    if peak > capacity {
        return Err(Error::InfeasibleTask {
            task_id: plan.task_id,
            qubits: peak,
            capacity,
        });
    }
    Ok(plan)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    /// `None` when the worker is idle.
    pub task_id: Option<String>,
    pub qubits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerTimeline {
    pub worker_id: usize,
    pub capacity: usize,
    pub slots: Vec<Slot>,
}

impl WorkerTimeline {
    pub fn active_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.task_id.is_some()).count()
    }

    pub fn busy_qubit_slots(&self) -> usize {
        self.slots.iter().map(|s| s.qubits).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Policy {
    /// Next task goes to the worker that frees up first, lowest id on ties.
    #[default]
    EarliestAvailable,
}

pub fn schedule(tasks: &[TaskPlan], workers: usize, capacity: usize, policy: Policy) -> Result<Vec<WorkerTimeline>> {
    if workers == 0 {
        return Err(Error::invalid("at least one worker is required"));
    }
    let mut timelines: Vec<WorkerTimeline> = (0..workers)
        .map(|worker_id| WorkerTimeline {
            worker_id,
            capacity,
            slots: Vec::new(),
        })
        .collect();
    for task in tasks {
        if task.peak_qubits() > capacity {
            return Err(Error::InfeasibleTask {
                task_id: task.task_id.clone(),
                qubits: task.peak_qubits(),
                capacity,
            });
        }
        let worker = match policy {
            Policy::EarliestAvailable => timelines
                .iter_mut()
                .min_by_key(|t| (t.slots.len(), t.worker_id))
                .expect("workers > 0"),
        };
        for seg in &task.segments {
            worker.slots.extend((0..seg.slots).map(|_| Slot {
                task_id: Some(task.task_id.clone()),
                qubits: seg.qubits,
            }));
        }
    }
    Ok(timelines)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerReport {
    pub worker_id: usize,
    pub active_slots: usize,
    pub horizon: usize,
    pub active_fraction: f64,
    /// Mean of `qubits / capacity` over the worker's active slots.
    pub mean_normalized_cqc: f64,
    pub cqc: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilizationReport {
    pub capacity: usize,
    pub horizon: usize,
    pub workers: Vec<WorkerReport>,
    pub total_active_slots: usize,
    pub total_cqc: usize,
    /// `total_cqc / (capacity × total_active_slots)`.
    pub overall_normalized_cqc: f64,
    /// Mean of the per-worker active fractions.
    pub mean_active_fraction: f64,
}

pub fn utilization(timelines: &[WorkerTimeline], horizon: Option<usize>) -> Result<UtilizationReport> {
    let longest = timelines.iter().map(|t| t.slots.len()).max().unwrap_or(0);
    let horizon = match horizon {
        Some(h) if h < longest => {
            return Err(Error::invalid(format!("horizon {h} is shorter than the longest timeline ({longest})")))
        }
        Some(h) => h,
        None => longest,
    };
    let capacity = timelines.first().map_or(0, |t| t.capacity);
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let workers: Vec<WorkerReport> = timelines
        .iter()
        .map(|t| {
            let active = t.active_slots();
            let cqc = t.busy_qubit_slots();
            WorkerReport {
                worker_id: t.worker_id,
                active_slots: active,
                horizon,
                active_fraction: ratio(active as f64, horizon as f64),
                mean_normalized_cqc: ratio(cqc as f64, (t.capacity * active) as f64),
                cqc,
            }
        })
        .collect();
    let total_active_slots = workers.iter().map(|w| w.active_slots).sum();
    let total_cqc = workers.iter().map(|w| w.cqc).sum();
    let mean_active_fraction = ratio(
        workers.iter().map(|w| w.active_fraction).sum::<f64>(),
        workers.len() as f64,
    );
    Ok(UtilizationReport {
        capacity,
        horizon,
        total_active_slots,
        total_cqc,
        overall_normalized_cqc: ratio(total_cqc as f64, (capacity * total_active_slots) as f64),
        mean_active_fraction,
        workers,
    })
}

/// Writes `worker_id,slot,task_id,qubits` rows, padding every worker with
/// idle slots up to `horizon`.
pub fn write_timeline_csv<W: Write>(out: W, timelines: &[WorkerTimeline], horizon: usize) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(out, "worker_id,slot,task_id,qubits")?;
    for t in timelines {
        for slot in 0..horizon.max(t.slots.len()) {
            match t.slots.get(slot) {
                Some(Slot {
                    task_id: Some(id),
                    qubits,
                }) => writeln!(out, "{},{},{},{}", t.worker_id, slot, id, qubits)?,
                _ => writeln!(out, "{},{},idle,0", t.worker_id, slot)?,
            }
        }
    }
    out.flush()
}
