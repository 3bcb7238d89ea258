use thiserror::Error;

use crate::orchestrator::SearchTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("inconsistent mapping: {0}")]
    Inconsistency(String),

    /// Every candidate was filtered out. Carries the trace up to and including
    /// the iteration that emptied the survivor set.
    #[error("empty result in iteration {iteration}: every candidate was filtered out")]
    EmptyResult {
        iteration: usize,
        trace: Box<SearchTrace>,
    },

    #[error("infeasible task {task_id}: needs {qubits} qubits, worker capacity is {capacity}")]
    InfeasibleTask {
        task_id: String,
        qubits: usize,
        capacity: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag used by the CLI error envelope.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Capacity(_) => "capacity",
            Error::Inconsistency(_) => "inconsistency",
            Error::EmptyResult { .. } => "empty_result",
            Error::InfeasibleTask { .. } => "infeasible_task",
        }
    }
}
