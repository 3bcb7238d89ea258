//! Classical index/value management around each quantum run.
//!
//! Values are compressed to small dense ids (targets first), indexes are
//! renumbered to `0..len` between iterations, and every record is packed
//! into one basis label: index bits followed by value bits.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{format_bitstring, ProbabilityMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataPoint {
    pub index: u64,
    pub value: u64,
}

impl DataPoint {
    pub fn new(index: u64, value: u64) -> Self {
        Self { index, value }
    }
}

/// Ordered `(index, value)` records with unique indexes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<DataPoint>", try_from = "Vec<DataPoint>")]
pub struct Dataset {
    items: Vec<DataPoint>,
}

impl TryFrom<Vec<DataPoint>> for Dataset {
    type Error = Error;

    fn try_from(items: Vec<DataPoint>) -> Result<Self> {
        Self::new(items)
    }
}

impl From<Dataset> for Vec<DataPoint> {
    fn from(d: Dataset) -> Self {
        d.items
    }
}

impl Dataset {
    pub fn new(items: Vec<DataPoint>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        if let Some(dup) = items.iter().find(|d| !seen.insert(d.index)) {
            return Err(Error::invalid(format!("index {} appears more than once", dup.index)));
        }
        Ok(Self { items })
    }

    /// Dataset with indexes `0..values.len()`.
    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        Self {
            items: values
                .into_iter()
                .enumerate()
                .map(|(i, v)| DataPoint::new(i as u64, v))
                .collect(),
        }
    }

    pub fn items(&self) -> &[DataPoint] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.items.iter().map(|d| d.value)
    }

    pub fn value_of(&self, index: u64) -> Option<u64> {
        self.items.iter().find(|d| d.index == index).map(|d| d.value)
    }

    pub fn distinct_values(&self) -> usize {
        self.values().collect::<BTreeSet<_>>().len()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.items.iter().map(|d| d.index).max()
    }

    /// Indexes whose value is one of `targets`.
    pub fn indexes_with_values(&self, targets: &[u64]) -> BTreeSet<u64> {
        self.items
            .iter()
            .filter(|d| targets.contains(&d.value))
            .map(|d| d.index)
            .collect()
    }
}

/// Append-only list of value keys; a value's id is its position.
///
/// The key of a value is the value itself. Any injective key would do, the
/// codebook only needs membership and position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValueCodebook {
    seen: Vec<u64>,
    positions: HashMap<u64, u64>,
}

impl ValueCodebook {
    /// Codebook pre-seeded with `targets` in order, so they take ids `0..|T|`.
    pub fn seeded(targets: &[u64]) -> Self {
        let mut book = Self::default();
        for &t in targets {
            book.id_of(t);
        }
        book
    }

    /// Position of `value`, appending it first if unseen.
    pub fn id_of(&mut self, value: u64) -> u64 {
        if let Some(&id) = self.positions.get(&value) {
            return id;
        }
        let id = self.seen.len() as u64;
        self.seen.push(value);
        self.positions.insert(value, id);
        id
    }

    pub fn lookup(&self, value: u64) -> Option<u64> {
        self.positions.get(&value).copied()
    }

    pub fn seen(&self) -> &[u64] {
        &self.seen
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Replaces every value with its codebook id. Targets get `0..|T|` in the
/// order given; other values are numbered by first appearance in `data`.
pub fn update_values(data: &Dataset, targets: &[u64]) -> Dataset {
    update_values_with_codebook(data, targets).0
}

pub fn update_values_with_codebook(data: &Dataset, targets: &[u64]) -> (Dataset, ValueCodebook) {
    let mut book = ValueCodebook::seeded(targets);
    let items = data
        .items
        .iter()
        .map(|d| DataPoint::new(d.index, book.id_of(d.value)))
        .collect();
    (Dataset { items }, book)
}

/// Fresh index `k` → original index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexMapping {
    originals: Vec<u64>,
}

impl IndexMapping {
    pub fn original(&self, fresh: u64) -> Option<u64> {
        usize::try_from(fresh).ok().and_then(|k| self.originals.get(k).copied())
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    /// `(fresh, original)` pairs in fresh-index order.
    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.originals.iter().enumerate().map(|(k, &o)| (k as u64, o))
    }
}

/// Assigns fresh indexes `0..len` to the entries of `map` in iteration order.
pub fn update_indexes(map: &[(u64, u64)]) -> IndexMapping {
    IndexMapping {
        originals: map.iter().map(|&(idx, _)| idx).collect(),
    }
}

/// `map` with indexes renumbered through [`update_indexes`].
pub fn relabel(map: &[(u64, u64)]) -> Vec<(u64, u64)> {
    map.iter()
        .enumerate()
        .map(|(k, &(_, v))| (k as u64, v))
        .collect()
}

/// Rekeys a fresh-index map back to original indexes.
pub fn maintain_indexes(map: &[(u64, u64)], mapping: &IndexMapping) -> Result<Vec<(u64, u64)>> {
    map.iter()
        .map(|&(fresh, v)| {
            mapping
                .original(fresh)
                .map(|o| (o, v))
                .ok_or_else(|| Error::Inconsistency(format!("no original index for fresh index {fresh}")))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitWidths {
    pub index_bits: usize,
    pub value_bits: usize,
}

impl QubitWidths {
    pub fn new(index_bits: usize, value_bits: usize) -> Self {
        Self {
            index_bits,
            value_bits,
        }
    }

    pub fn total(&self) -> usize {
        self.index_bits + self.value_bits
    }

    pub fn pack(&self, point: DataPoint) -> Result<usize> {
        let fits = |x: u64, bits: usize| bits < 64 && x >> bits == 0;
        if !fits(point.index, self.index_bits) || !fits(point.value, self.value_bits) {
            return Err(Error::invalid(format!(
                "({}, {}) does not fit widths ({}, {})",
                point.index, point.value, self.index_bits, self.value_bits
            )));
        }
        Ok(((point.index << self.value_bits) | point.value) as usize)
    }

    pub fn unpack(&self, basis: usize) -> DataPoint {
        let basis = basis as u64;
        DataPoint::new(basis >> self.value_bits, basis & ((1u64 << self.value_bits) - 1))
    }

    pub fn bitstring(&self, point: DataPoint) -> Result<String> {
        Ok(format_bitstring(self.pack(point)?, self.total()))
    }
}

/// `max(1, ceil(log2(count)))`.
fn bits_for(count: u64) -> usize {
    if count <= 1 {
        1
    } else {
        (u64::BITS - (count - 1).leading_zeros()) as usize
    }
}

/// Register widths for `data`: index bits cover `max_index + 1` slots and
/// value bits cover the number of distinct values.
pub fn compute_qubits(data: &Dataset) -> QubitWidths {
    let index_slots = data.max_index().map_or(1, |m| m + 1);
    QubitWidths::new(bits_for(index_slots), bits_for(data.distinct_values() as u64))
}

/// Search problem handed to the quantum layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedProblem {
    pub widths: QubitWidths,
    /// Basis labels whose value field is a target id.
    pub marked: BTreeSet<usize>,
    /// Basis labels of every record in the dataset.
    pub universe: BTreeSet<usize>,
}

impl EncodedProblem {
    pub fn num_qubits(&self) -> usize {
        self.widths.total()
    }

    pub fn marked_bitstrings(&self) -> Vec<String> {
        self.marked
            .iter()
            .map(|&b| format_bitstring(b, self.num_qubits()))
            .collect()
    }
}

/// Packs every record as `index ++ value` and marks those carrying a target id.
pub fn generate_binary_pairs(
    data: &Dataset,
    widths: QubitWidths,
    target_ids: &[u64],
) -> Result<EncodedProblem> {
    let mut marked = BTreeSet::new();
    let mut universe = BTreeSet::new();
    for &point in &data.items {
        let basis = widths.pack(point)?;
        universe.insert(basis);
        if target_ids.contains(&point.value) {
            marked.insert(basis);
        }
    }
    Ok(EncodedProblem {
        widths,
        marked,
        universe,
    })
}

/// Splits measured labels back into `(index, value)`, ordered by descending
/// probability then ascending index.
pub fn decode(probs: &ProbabilityMap, widths: QubitWidths) -> Result<Vec<(u64, u64)>> {
    if !probs.is_empty() && probs.num_qubits() != widths.total() {
        return Err(Error::invalid(format!(
            "labels have {} bits, widths ({}, {}) need {}",
            probs.num_qubits(),
            widths.index_bits,
            widths.value_bits,
            widths.total()
        )));
    }
    let mut rows: Vec<(f64, DataPoint)> = probs.iter().map(|(b, p)| (p, widths.unpack(b))).collect();
    rows.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.index.cmp(&b.1.index)));
    let mut seen = BTreeSet::new();
    rows.into_iter()
        .map(|(_, d)| {
            if seen.insert(d.index) {
                Ok((d.index, d.value))
            } else {
                Err(Error::Inconsistency(format!("index {} decoded with two values", d.index)))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn values(d: &Dataset) -> Vec<u64> {
        d.values().collect()
    }

    #[test]
    fn duplicate_indexes_rejected() {
        assert!(Dataset::new(vec![DataPoint::new(1, 0), DataPoint::new(1, 2)]).is_err());
    }

    #[test]
    fn update_values_examples() {
        let d = Dataset::from_values([5, 3, 5, 9]);
        assert_eq!(values(&update_values(&d, &[5])), vec![0, 1, 0, 2]);
        let d = Dataset::from_values([7, 7, 7]);
        assert_eq!(values(&update_values(&d, &[7])), vec![0, 0, 0]);
    }

    #[test]
    fn update_values_keeps_indexes() {
        let d = Dataset::new(vec![DataPoint::new(9, 4), DataPoint::new(2, 1)]).unwrap();
        let u = update_values(&d, &[1]);
        assert_eq!(u.items(), &[DataPoint::new(9, 1), DataPoint::new(2, 0)]);
    }

    #[test]
    fn update_indexes_examples() {
        let m = [(7, 0), (2, 1), (9, 0)];
        let map = update_indexes(&m);
        assert_eq!(map.pairs().collect::<Vec<_>>(), vec![(0, 7), (1, 2), (2, 9)]);
        assert_eq!(update_indexes(&[(0, 0)]).pairs().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn maintain_indexes_examples() {
        let map = update_indexes(&[(7, 0), (2, 1), (9, 0)]);
        let restored = maintain_indexes(&[(0, 0), (1, 1), (2, 0)], &map).unwrap();
        assert_eq!(restored, vec![(7, 0), (2, 1), (9, 0)]);
        assert!(maintain_indexes(&[], &map).unwrap().is_empty());
        assert!(matches!(
            maintain_indexes(&[(3, 0)], &map),
            Err(Error::Inconsistency(_))
        ));
    }

    #[test]
    fn qubit_widths() {
        let d = Dataset::from_values((0..15).map(|i| if i < 5 { 0 } else { i % 10 + 1 }));
        assert_eq!(d.distinct_values(), 11);
        assert_eq!(compute_qubits(&d), QubitWidths::new(4, 4));
        assert_eq!(compute_qubits(&Dataset::from_values([0; 5])), QubitWidths::new(3, 1));
        assert_eq!(compute_qubits(&Dataset::from_values([0])), QubitWidths::new(1, 1));
        assert_eq!(compute_qubits(&Dataset::from_values([0; 40])).total(), 7);
        assert_eq!(compute_qubits(&Dataset::from_values(0..16)), QubitWidths::new(4, 4));
        assert_eq!(compute_qubits(&Dataset::from_values(0..17)), QubitWidths::new(5, 5));
    }

    #[test]
    fn binary_pair_layout() {
        let w = QubitWidths::new(4, 2);
        assert_eq!(w.bitstring(DataPoint::new(2, 1)).unwrap(), "001001");
        assert_eq!(QubitWidths::new(1, 1).bitstring(DataPoint::new(0, 0)).unwrap(), "00");
        assert!(w.pack(DataPoint::new(16, 0)).is_err());
        assert!(w.pack(DataPoint::new(0, 4)).is_err());
    }

    #[test]
    fn marked_count_matches_scan() {
        let raw: Vec<u64> = (0..15).map(|i| if i % 3 == 0 { 42 } else { i }).collect();
        let d = update_values(&Dataset::from_values(raw.iter().copied()), &[42]);
        let expected = raw.iter().filter(|&&v| v == 42).count();
        let p = generate_binary_pairs(&d, compute_qubits(&d), &[0]).unwrap();
        assert_eq!(p.marked.len(), expected);
        assert_eq!(p.marked.len(), 5);
        assert_eq!(p.universe.len(), 15);
        assert!(p.marked.is_subset(&p.universe));
    }

    #[test]
    fn decode_examples() {
        let probs = ProbabilityMap::from_bitstrings(&[("001001", 0.2)]).unwrap();
        assert_eq!(decode(&probs, QubitWidths::new(4, 2)).unwrap(), vec![(2, 1)]);

        let empty = ProbabilityMap::new(6, Default::default());
        assert!(decode(&empty, QubitWidths::new(4, 2)).unwrap().is_empty());

        let dup = ProbabilityMap::from_bitstrings(&[("001001", 0.2), ("001000", 0.1)]).unwrap();
        assert!(matches!(decode(&dup, QubitWidths::new(4, 2)), Err(Error::Inconsistency(_))));

        assert!(decode(&probs, QubitWidths::new(3, 2)).is_err());
    }

    #[test]
    fn decode_orders_by_probability_then_index() {
        let probs = ProbabilityMap::from_bitstrings(&[
            ("0000", 0.1),
            ("0100", 0.3),
            ("1000", 0.1),
            ("1100", 0.5),
        ])
        .unwrap();
        let out = decode(&probs, QubitWidths::new(2, 2)).unwrap();
        assert_eq!(out, vec![(3, 0), (1, 0), (0, 0), (2, 0)]);
    }

    proptest! {
        #[test]
        fn update_values_invariants(raw in prop::collection::vec(0u64..20, 1..40), t in 0u64..20) {
            let d = Dataset::from_values(raw.iter().copied());
            let (u, book) = update_values_with_codebook(&d, &[t]);
            let distinct = raw.iter().chain([&t]).collect::<BTreeSet<_>>().len() as u64;
            prop_assert!(u.values().all(|v| v < distinct));
            for (orig, new) in raw.iter().zip(u.values()) {
                prop_assert_eq!(*orig == t, new == 0);
            }
            // non-target ids follow first appearance
            let mut firsts = Vec::new();
            for v in &raw {
                if *v != t && !firsts.contains(v) {
                    firsts.push(*v);
                }
            }
            prop_assert_eq!(&book.seen()[1..], &firsts[..]);
        }

        #[test]
        fn update_values_is_idempotent_on_compressed_targets(raw in prop::collection::vec(0u64..12, 1..30), t in 0u64..12) {
            let once = update_values(&Dataset::from_values(raw), &[t]);
            let twice = update_values(&once, &[0]);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn pack_decode_roundtrip(points in prop::collection::btree_map(0u64..64, 0u64..16, 1..30)) {
            let items: Vec<_> = points.iter().map(|(&i, &v)| DataPoint::new(i, v)).collect();
            let d = Dataset::new(items.clone()).unwrap();
            let w = QubitWidths::new(6, 4);
            let p = generate_binary_pairs(&d, w, &[]).unwrap();
            let probs = ProbabilityMap::new(w.total(), p.universe.iter().map(|&b| (b, 0.5)).collect());
            let mut back = decode(&probs, w).unwrap();
            back.sort();
            let mut expected: Vec<_> = items.iter().map(|d| (d.index, d.value)).collect();
            expected.sort();
            prop_assert_eq!(back, expected);
        }

        #[test]
        fn index_mapping_roundtrip(points in prop::collection::btree_map(0u64..1000, 0u64..8, 0..30)) {
            let m: Vec<(u64, u64)> = points.into_iter().collect();
            let mapping = update_indexes(&m);
            prop_assert_eq!(maintain_indexes(&relabel(&m), &mapping).unwrap(), m);
        }

        #[test]
        fn widths_monotone_under_shrinking(raw in prop::collection::vec(0u64..30, 2..60), keep in 1usize..60) {
            let d = update_values(&Dataset::from_values(raw.iter().copied()), &[raw[0]]);
            let keep = keep.min(d.len());
            let smaller = Dataset::from_values(d.values().take(keep));
            let (a, b) = (compute_qubits(&d), compute_qubits(&smaller));
            prop_assert!(b.index_bits <= a.index_bits && b.value_bits <= a.value_bits);
        }
    }
}
