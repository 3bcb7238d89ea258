//! Grover amplitude amplification over a set of marked basis states.
//!
//! The oracle and the diffusion step are applied as single passes over the
//! amplitude vector; materialized operators only exist for test oracles.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::GateMatrix;
use crate::statevector::{parse_bitstring, ProbabilityMap, Statevector};

/// Phase oracle flipping the sign of every marked basis state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Oracle {
    num_qubits: usize,
    marked: BTreeSet<usize>,
}

impl Oracle {
    /// Oracle from basis indices. Every index must be below `2^num_qubits`.
    pub fn from_indices<I>(marked: I, num_qubits: usize) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let marked: BTreeSet<usize> = marked.into_iter().collect();
        if num_qubits >= usize::BITS as usize {
            return Err(Error::Capacity(format!("{num_qubits} qubits")));
        }
        if let Some(&bad) = marked.iter().find(|&&m| m >> num_qubits != 0) {
            return Err(Error::invalid(format!(
                "marked index {bad} does not fit in {num_qubits} qubits"
            )));
        }
        Ok(Self { num_qubits, marked })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn marked(&self) -> &BTreeSet<usize> {
        &self.marked
    }

    pub fn is_marked(&self, index: usize) -> bool {
        self.marked.contains(&index)
    }

    /// 0/1 indicator over all `2^n` basis states.
    pub fn indicator(&self) -> Vec<u8> {
        (0..1usize << self.num_qubits)
            .map(|i| u8::from(self.marked.contains(&i)))
            .collect()
    }

    /// The oracle as an explicit diagonal `±1` matrix.
    pub fn phase_matrix(&self) -> GateMatrix {
        let dim = 1usize << self.num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            let sign = if self.marked.contains(&i) { -1.0 } else { 1.0 };
            entries[i * dim + i] = Complex64::new(sign, 0.0);
        }
        GateMatrix::new(dim, entries).expect("square power-of-two matrix")
    }
}

/// Builds an oracle from MSB-first bitstrings of length `num_qubits`.
pub fn build_oracle<S: AsRef<str>>(marked: &[S], num_qubits: usize) -> Result<Oracle> {
    let idx = marked
        .iter()
        .map(|s| parse_bitstring(s.as_ref(), num_qubits))
        .collect::<Result<Vec<_>>>()?;
    Oracle::from_indices(idx, num_qubits)
}

/// How the final state is read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RunMode {
    /// True probabilities `|amplitude|²` for every basis state.
    #[default]
    Exact,
    /// Empirical frequencies over `shots` seeded measurements.
    Sampled { shots: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroverRun {
    pub num_qubits: usize,
    pub invocations: usize,
    pub result: ProbabilityMap,
    pub shots_used: Option<u64>,
}

/// Prepares `|s⟩` and applies `invocations` rounds of phase flip + diffusion.
pub fn grover_state(oracle: &Oracle, invocations: usize) -> Result<Statevector> {
    let mut state = Statevector::uniform_superposition(oracle.num_qubits)?;
    for _ in 0..invocations {
        state.phase_flip(oracle.marked.iter().copied())?;
        state.diffuse();
    }
    Ok(state)
}

pub fn grover_run(oracle: &Oracle, invocations: usize, mode: RunMode) -> Result<GroverRun> {
    let state = grover_state(oracle, invocations)?;
    let (result, shots_used) = match mode {
        RunMode::Exact => (state.probabilities(), None),
        RunMode::Sampled { shots, seed } => (state.sample(shots, seed)?.frequencies(), Some(shots)),
    };
    Ok(GroverRun {
        num_qubits: oracle.num_qubits,
        invocations,
        result,
        shots_used,
    })
}

/// `floor(π / (4·arcsin√(M/N)))`, at least 1. Requires `1 ≤ M < N/2`.
pub fn optimal_invocations(space: u64, targets: u64) -> Result<usize> {
    if targets == 0 {
        return Err(Error::invalid("at least one target is required"));
    }
    if targets.saturating_mul(2) >= space {
        return Err(Error::invalid(format!(
            "{targets} targets in a space of {space}: the optimal count needs M < N/2"
        )));
    }
    let theta = (targets as f64 / space as f64).sqrt().asin();
    let k = (std::f64::consts::PI / (4.0 * theta)).floor() as usize;
    Ok(k.max(1))
}

/// Per-state probabilities after `k` invocations from the rotation picture:
/// `(sin²((2k+1)θ)/M, cos²((2k+1)θ)/(N−M))` with `θ = arcsin√(M/N)`.
pub fn closed_form_probability(space: u64, targets: u64, k: usize) -> (f64, f64) {
    let (n, m) = (space as f64, targets as f64);
    let theta = (m / n).sqrt().asin();
    let angle = (2 * k + 1) as f64 * theta;
    let p_target = angle.sin().powi(2) / m;
    let p_other = if targets >= space {
        0.0
    } else {
        angle.cos().powi(2) / (n - m)
    };
    (p_target, p_other)
}
