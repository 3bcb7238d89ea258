//! Brute-force cross-checks of the simulator against explicit dense matrices.

use num_complex::Complex64;
use proptest::prelude::*;
use crate::gates::{is_unitary, named_gate, GateKind, GateMatrix};
use crate::grover::{closed_form_probability, grover_state, Oracle};
use crate::Statevector;

fn bit(idx: usize, q: usize, n: usize) -> usize {
    (idx >> (n - 1 - q)) & 1
}

/// Full `2^n` operator for `gate` on `qubits`; the first listed qubit is the
/// least significant bit of the gate index.
fn embed(gate: &GateMatrix, qubits: &[usize], n: usize) -> Vec<Vec<Complex64>> {
    let dim = 1 << n;
    let mask: usize = qubits.iter().map(|&q| 1 << (n - 1 - q)).sum();
    let local = |idx: usize| qubits.iter().enumerate().map(|(i, &q)| bit(idx, q, n) << i).sum::<usize>();
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| {
                    if r & !mask == c & !mask {
                        gate.get(local(r), local(c))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect()
}

fn matvec(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn random_state(n: usize, raw: &[(f64, f64)]) -> Statevector {
    let amps: Vec<Complex64> = raw.iter().take(1 << n).map(|&(re, im)| Complex64::new(re, im)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn gate_strategy() -> impl Strategy<Value = (GateKind, f64)> {
    (0..GateKind::ALL.len(), -7.0f64..7.0).prop_map(|(i, t)| (GateKind::ALL[i], t))
}

fn gate_for(kind: GateKind, theta: f64) -> GateMatrix {
    named_gate(kind, kind.is_parameterized().then_some(theta)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn apply_gate_matches_dense_embedding(
        (kind, theta) in gate_strategy(),
        n in 3usize..=6,
        perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
    ) {
        let gate = gate_for(kind, theta);
        let qubits: Vec<usize> = perm.into_iter().filter(|&q| q < n).take(gate.arity()).collect();
        let mut state = random_state(n, &raw);
        let expected = matvec(&embed(&gate, &qubits, n), state.amplitudes());
        state.apply_gate(&gate, &qubits).unwrap();
        for (a, b) in state.amplitudes().iter().zip(&expected) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_gate_is_a_kronecker_product(
        (kind, theta) in gate_strategy().prop_filter("single qubit", |(k, _)| gate_for(*k, 0.3).arity() == 1),
        n in 1usize..=6,
        q in 0usize..6,
    ) {
        let q = q % n;
        let gate = gate_for(kind, theta);
        let full = GateMatrix::identity(1 << q)
            .kron(&gate)
            .kron(&GateMatrix::identity(1 << (n - q - 1)));
        let dense = embed(&gate, &[q], n);
        for (r, row) in dense.iter().enumerate() {
            for (c, want) in row.iter().enumerate() {
                prop_assert!((full.get(r, c) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn norm_is_preserved(
        ops in prop::collection::vec((gate_strategy(), Just((0..8).collect::<Vec<usize>>()).prop_shuffle()), 1..30),
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256),
    ) {
        let mut state = random_state(8, &raw);
        for ((kind, theta), perm) in ops {
            let gate = gate_for(kind, theta);
            state.apply_gate(&gate, &perm[..gate.arity()]).unwrap();
            prop_assert!((state.norm() - 1.0).abs() < 1e-10);
        }
        let total: f64 = state.probabilities().iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grover_matches_explicit_operator(
        n in 2usize..=6,
        marks in prop::collection::btree_set(0usize..64, 1..8),
        k in 0usize..6,
    ) {
        let dim = 1usize << n;
        let marks: Vec<usize> = marks.into_iter().filter(|&m| m < dim).collect();
        prop_assume!(!marks.is_empty());
        let oracle = Oracle::from_indices(marks.iter().copied(), n).unwrap();
        let phase = oracle.phase_matrix();
        // 2|s><s| - I
        let s = 1.0 / dim as f64;
        let diffusion = GateMatrix::new(
            dim,
            (0..dim * dim)
                .map(|i| Complex64::new(2.0 * s - if i / dim == i % dim { 1.0 } else { 0.0 }, 0.0))
                .collect(),
        )
        .unwrap();
        let step = diffusion.matmul(&phase).unwrap();
        let mut v = vec![Complex64::new(s.sqrt(), 0.0); dim];
        for _ in 0..k {
            v = (0..dim).map(|r| (0..dim).map(|c| step.get(r, c) * v[c]).sum()).collect();
        }
        let sim = grover_state(&oracle, k).unwrap();
        for (a, b) in sim.amplitudes().iter().zip(&v) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn catalog_gates_are_unitary((kind, theta) in gate_strategy()) {
        prop_assert!(is_unitary(&gate_for(kind, theta), 1e-12));
    }
}

#[test]
fn closed_form_grid() {
    for n in 3..=12usize {
        let space = 1u64 << n;
        for m in [1u64, 5, 15, 20] {
            if m > space / 4 {
                continue;
            }
            let oracle = Oracle::from_indices((0..m as usize).map(|i| i * (space as usize / m as usize)), n).unwrap();
            for k in 0..=12 {
                let probs = grover_state(&oracle, k).unwrap().probabilities();
                let (pt, pn) = closed_form_probability(space, m, k);
                for (idx, p) in probs.iter() {
                    let want = if oracle.is_marked(idx) { pt } else { pn };
                    assert!((p - want).abs() < 1e-9, "n={n} m={m} k={k} idx={idx}: {p} vs {want}");
                }
            }
        }
    }
}
