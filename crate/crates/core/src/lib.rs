//! Grover-based database search with iterative qubit-saving strategies and
//! a small multi-worker scheduling simulator.

pub mod cli;
pub mod clustersim;
pub mod encoding;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod gates;
pub mod grover;
pub mod orchestrator;
pub mod statevector;

#[cfg(test)]
mod crosscheck;

pub use encoding::{DataPoint, Dataset, QubitWidths};
pub use error::{Error, Result};
pub use gates::{GateKind, GateMatrix};
pub use grover::{Oracle, RunMode};
pub use orchestrator::{Algorithm, IterationRecord, SearchOptions, SearchTrace};
pub use statevector::{ProbabilityMap, Statevector};
