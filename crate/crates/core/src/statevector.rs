//! Dense statevector simulator.
//!
//! Basis index `b` encodes a bitstring with qubit 0 as the most significant
//! bit, so on three qubits index 6 is `"110"` (qubit 0 = 1, qubit 2 = 0).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gates::GateMatrix;

pub const MAX_QUBITS: usize = 24;

/// Parses an MSB-first bitstring of exactly `width` characters.
pub fn parse_bitstring(s: &str, width: usize) -> Result<usize> {
    if s.len() != width {
        return Err(Error::invalid(format!(
            "bitstring {s:?} has length {}, expected {width}",
            s.len()
        )));
    }
    s.bytes().try_fold(0usize, |acc, b| match b {
        b'0' => Ok(acc << 1),
        b'1' => Ok((acc << 1) | 1),
        _ => Err(Error::invalid(format!("bitstring {s:?} contains {:?}", b as char))),
    })
}

pub fn format_bitstring(index: usize, width: usize) -> String {
    if width == 0 {
        return String::new();
    }
    format!("{index:0width$b}")
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n} qubits requested, supported range is 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `H^{⊗n}|0…0⟩`.
    pub fn uniform_superposition(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            num_qubits: n,
            amplitudes: vec![a; dim],
        })
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the norm
    /// must be 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!("{dim} amplitudes is not a power of two ≥ 2")));
        }
        let n = dim.trailing_zeros() as usize;
        check_capacity(n)?;
        let sv = Self {
            num_qubits: n,
            amplitudes,
        };
        let norm = sv.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(sv)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies `gate` to `qubits`. The first listed qubit is the
    /// least-significant bit of the gate's matrix index.
    pub fn apply_gate(&mut self, gate: &GateMatrix, qubits: &[usize]) -> Result<()> {
        let k = qubits.len();
        if k == 0 || gate.dim() != 1 << k {
            return Err(Error::invalid(format!(
                "{}x{} gate cannot act on {k} qubits",
                gate.dim(),
                gate.dim()
            )));
        }
        let n = self.num_qubits;
        let mut mask = 0usize;
        let mut shifts = Vec::with_capacity(k);
        for &q in qubits {
            if q >= n {
                return Err(Error::invalid(format!("qubit {q} out of range for {n} qubits")));
            }
            let bit = 1usize << (n - 1 - q);
            if mask & bit != 0 {
                return Err(Error::invalid(format!("qubit {q} listed twice")));
            }
            mask |= bit;
            shifts.push(bit);
        }
        let offsets: Vec<usize> = (0..gate.dim())
            .map(|m| {
                shifts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| m >> j & 1 == 1)
                    .map(|(_, bit)| bit)
                    .sum()
            })
            .collect();

        let mut local = vec![Complex64::new(0.0, 0.0); gate.dim()];
        for base in (0..self.dim()).filter(|i| i & mask == 0) {
            for (slot, off) in local.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                self.amplitudes[base | off] = local
                    .iter()
                    .enumerate()
                    .map(|(c, a)| gate.get(r, c) * a)
                    .sum();
            }
        }
        Ok(())
    }

    /// Negates the amplitude of every basis index in `marked`.
    pub fn phase_flip<I>(&mut self, marked: I) -> Result<()>
    where
        I: IntoIterator<Item = usize>,
    {
        let dim = self.dim();
        let marked: Vec<usize> = marked.into_iter().collect();
        if let Some(bad) = marked.iter().find(|&&m| m >= dim) {
            return Err(Error::invalid(format!("basis index {bad} out of range")));
        }
        for m in marked {
            self.amplitudes[m] = -self.amplitudes[m];
        }
        Ok(())
    }

    /// Bitstring form of [`phase_flip`](Self::phase_flip).
    pub fn phase_flip_bitstrings<S: AsRef<str>>(&mut self, marked: &[S]) -> Result<()> {
        let idx = marked
            .iter()
            .map(|s| parse_bitstring(s.as_ref(), self.num_qubits))
            .collect::<Result<Vec<_>>>()?;
        self.phase_flip(idx)
    }

    /// Inversion about the mean amplitude, i.e. `2|s⟩⟨s| − I`.
    pub fn diffuse(&mut self) {
        let mean = self.amplitudes.iter().sum::<Complex64>() / self.dim() as f64;
        let twice = mean * 2.0;
        for a in &mut self.amplitudes {
            *a = twice - *a;
        }
    }

    pub fn probabilities(&self) -> ProbabilityMap {
        ProbabilityMap {
            num_qubits: self.num_qubits,
            entries: self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, a)| (i, a.norm_sqr()))
                .collect(),
        }
    }

    /// Multinomial measurement of `shots` samples. Draws come from
    /// `ChaCha8Rng::seed_from_u64(seed)` through inverse-CDF lookup on the
    /// cumulative probabilities in basis order.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<ShotCounts> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.dim());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let last_nonzero = self
            .amplitudes
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
            *counts.entry(idx).or_insert(0u64) += 1;
        }
        Ok(ShotCounts {
            num_qubits: self.num_qubits,
            shots,
            counts,
        })
    }
}

/// Basis state → probability, keyed by basis index in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMap {
    num_qubits: usize,
    entries: BTreeMap<usize, f64>,
}

impl ProbabilityMap {
    pub fn new(num_qubits: usize, entries: BTreeMap<usize, f64>) -> Self {
        Self { num_qubits, entries }
    }

    /// Builds a map from bitstring keys; every key must have the same length.
    pub fn from_bitstrings<S: AsRef<str>>(pairs: &[(S, f64)]) -> Result<Self> {
        let width = pairs.first().map(|(s, _)| s.as_ref().len()).unwrap_or(0);
        let entries = pairs
            .iter()
            .map(|(s, p)| Ok((parse_bitstring(s.as_ref(), width)?, *p)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self {
            num_qubits: width,
            entries,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.entries.get(&index).copied()
    }

    pub fn get_bitstring(&self, s: &str) -> Option<f64> {
        parse_bitstring(s, self.num_qubits).ok().and_then(|i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.entries.is_empty() {
            0.0
        } else {
            self.total() / self.entries.len() as f64
        }
    }

    /// Keeps only the listed basis indices (missing ones are skipped).
    pub fn restrict<'a, I>(&self, keep: I) -> ProbabilityMap
    where
        I: IntoIterator<Item = &'a usize>,
    {
        let entries = keep
            .into_iter()
            .filter_map(|k| self.entries.get(k).map(|p| (*k, *p)))
            .collect();
        ProbabilityMap {
            num_qubits: self.num_qubits,
            entries,
        }
    }

    pub fn bitstring(&self, index: usize) -> String {
        format_bitstring(index, self.num_qubits)
    }

    /// `(bitstring, probability)` pairs in basis order.
    pub fn to_bitstring_pairs(&self) -> Vec<(String, f64)> {
        self.iter().map(|(k, p)| (self.bitstring(k), p)).collect()
    }
}

impl Serialize for ProbabilityMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, p) in self.iter() {
            map.serialize_entry(&self.bitstring(k), &p)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ProbabilityMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let pairs: Vec<(String, f64)> = raw.into_iter().collect();
        ProbabilityMap::from_bitstrings(&pairs).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotCounts {
    num_qubits: usize,
    shots: u64,
    counts: BTreeMap<usize, u64>,
}

impl ShotCounts {
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Empirical frequencies `count / shots` over the observed states.
    pub fn frequencies(&self) -> ProbabilityMap {
        let shots = self.shots as f64;
        ProbabilityMap {
            num_qubits: self.num_qubits,
            entries: self
                .counts
                .iter()
                .map(|(&k, &c)| (k, c as f64 / shots))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{named_gate, GateKind};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn bitstring_parsing() {
        assert_eq!(parse_bitstring("110", 3).unwrap(), 6);
        assert!(parse_bitstring("11", 3).is_err());
        assert!(parse_bitstring("1x0", 3).is_err());
        assert_eq!(format_bitstring(2, 6), "000010");
    }

    #[test]
    fn uniform_amplitudes() {
        let s = Statevector::uniform_superposition(1).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a - c(FRAC_1_SQRT_2)).norm() < 1e-15));
        let s = Statevector::uniform_superposition(3).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - 8f64.sqrt().recip()).abs() < 1e-15));
        let s = Statevector::uniform_superposition(12).unwrap();
        assert_eq!(s.dim(), 4096);
        assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(Statevector::uniform_superposition(0), Err(Error::Capacity(_))));
        assert!(matches!(Statevector::uniform_superposition(25), Err(Error::Capacity(_))));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = Statevector::basis_state(1, 0).unwrap();
        s.apply_gate(&named_gate(GateKind::H, None).unwrap(), &[0]).unwrap();
        assert!(max_diff(s.amplitudes(), &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]) < 1e-15);
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let mut s = Statevector::basis_state(2, 0b10).unwrap();
        s.apply_gate(&named_gate(GateKind::CNOT, None).unwrap(), &[0, 1]).unwrap();
        assert_eq!(s, Statevector::basis_state(2, 0b11).unwrap());

        let mut s = Statevector::basis_state(2, 0b01).unwrap();
        s.apply_gate(&named_gate(GateKind::CNOT, None).unwrap(), &[0, 1]).unwrap();
        assert_eq!(s, Statevector::basis_state(2, 0b01).unwrap());
    }

    #[test]
    fn zero_rz_leaves_state_unchanged() {
        let mut s = Statevector::basis_state(2, 0).unwrap();
        s.apply_gate(&named_gate(GateKind::H, None).unwrap(), &[0]).unwrap();
        let before = s.clone();
        s.apply_gate(&named_gate(GateKind::RZ, Some(0.0)).unwrap(), &[1]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn apply_gate_argument_errors() {
        let mut s = Statevector::uniform_superposition(3).unwrap();
        let cnot = named_gate(GateKind::CNOT, None).unwrap();
        assert!(s.apply_gate(&cnot, &[0]).is_err());
        assert!(s.apply_gate(&cnot, &[1, 1]).is_err());
        assert!(s.apply_gate(&cnot, &[0, 3]).is_err());
    }

    #[test]
    fn phase_flip_marks_target() {
        let mut s = Statevector::uniform_superposition(3).unwrap();
        s.phase_flip_bitstrings(&["111"]).unwrap();
        let a = 8f64.sqrt().recip();
        for (i, amp) in s.amplitudes().iter().enumerate() {
            let expected = if i == 7 { -a } else { a };
            assert!((amp.re - expected).abs() < 1e-15 && amp.im == 0.0);
        }
        assert!(s.phase_flip_bitstrings(&["11"]).is_err());
    }

    #[test]
    fn empty_and_double_phase_flip() {
        let mut s = Statevector::uniform_superposition(3).unwrap();
        s.apply_gate(&named_gate(GateKind::RY, Some(0.4)).unwrap(), &[1]).unwrap();
        let before = s.clone();
        s.phase_flip(std::iter::empty()).unwrap();
        assert_eq!(s, before);
        s.phase_flip([2, 5]).unwrap();
        s.phase_flip([2, 5]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn probabilities_basic() {
        let p = Statevector::uniform_superposition(2).unwrap().probabilities();
        assert!(p.iter().all(|(_, v)| (v - 0.25).abs() < 1e-15));
        let p = Statevector::basis_state(3, 0).unwrap().probabilities();
        assert_eq!(p.get_bitstring("000"), Some(1.0));
        assert!((p.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampling_deterministic_state() {
        let s = Statevector::basis_state(2, 0).unwrap();
        let counts = s.sample(100, 12345).unwrap();
        assert_eq!(counts.get(0), 100);
        assert_eq!(counts.iter().count(), 1);
    }

    #[test]
    fn sampling_within_binomial_bound() {
        let s = Statevector::uniform_superposition(1).unwrap();
        let counts = s.sample(24000, 7).unwrap();
        let sigma = (24000.0f64 * 0.25).sqrt();
        for i in 0..2 {
            assert!((counts.get(i) as f64 - 12000.0).abs() <= 4.0 * sigma);
        }
        assert_eq!(counts.get(0) + counts.get(1), 24000);
        assert_eq!(counts, s.sample(24000, 7).unwrap());
    }

    #[test]
    fn sampling_rejects_zero_shots() {
        let s = Statevector::uniform_superposition(1).unwrap();
        assert!(s.sample(0, 1).is_err());
    }

    #[test]
    fn diffusion_fixes_uniform_and_is_involution() {
        let mut s = Statevector::uniform_superposition(4).unwrap();
        let u = s.clone();
        s.diffuse();
        assert!(max_diff(s.amplitudes(), u.amplitudes()) < 1e-15);
        s.apply_gate(&named_gate(GateKind::RX, Some(0.7)).unwrap(), &[2]).unwrap();
        let before = s.clone();
        s.diffuse();
        s.diffuse();
        assert!(max_diff(s.amplitudes(), before.amplitudes()) < 1e-10);
    }

    proptest! {
        #[test]
        fn identity_gate_is_exact_noop(n in 1usize..6, seed in any::<u64>()) {
            let mut s = Statevector::uniform_superposition(n).unwrap();
            s.apply_gate(&named_gate(GateKind::RY, Some((seed % 100) as f64 / 13.0)).unwrap(), &[0]).unwrap();
            let before = s.clone();
            let q = (seed as usize) % n;
            s.apply_gate(&GateMatrix::identity(2), &[q]).unwrap();
            prop_assert_eq!(s, before);
        }
    }
}
