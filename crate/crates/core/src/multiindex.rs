//! Finite multi-index sets for Hermite functionals and their OU eigenvalues.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest enumeration accepted by [`enumerate_indices`].
pub const DEFAULT_CARDINALITY_CAP: usize = 20_000;

/// Per-mode Hermite degrees `(n_1, ..., n_M)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex { entries }
    }

    pub fn zero(modes: usize) -> Self {
        MultiIndex {
            entries: vec![0; modes],
        }
    }

    /// The index with a single 1 in (0-based) slot `k`.
    pub fn unit(modes: usize, k: usize) -> Self {
        assert!(k < modes, "unit slot {k} out of range for {modes} modes");
        let mut entries = vec![0; modes];
        entries[k] = 1;
        MultiIndex { entries }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, slot: usize) -> u32 {
        self.entries[slot]
    }

    /// Total degree `|n|`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Slot of the single nonzero entry when the index is a unit index.
    pub fn unit_slot(&self) -> Option<usize> {
        if self.degree() != 1 {
            return None;
        }
        self.entries.iter().position(|&e| e == 1)
    }

    /// Extends with trailing zeros (or checks that dropped entries are zero).
    pub fn padded(&self, modes: usize) -> Option<Self> {
        if modes >= self.entries.len() {
            let mut entries = self.entries.clone();
            entries.resize(modes, 0);
            Some(MultiIndex { entries })
        } else if self.entries[modes..].iter().all(|&e| e == 0) {
            Some(MultiIndex {
                entries: self.entries[..modes].to_vec(),
            })
        } else {
            None
        }
    }

    /// Entry-wise sum; lengths must agree.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), other.len(), "multi-index length mismatch");
        MultiIndex {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Bitmask of the slots where `self` and `other` differ (slots < 64).
    pub(crate) fn diff_mask(&self, other: &MultiIndex) -> u64 {
        let mut mask = 0u64;
        for (i, (a, b)) in self.entries.iter().zip(&other.entries).enumerate() {
            if a != b {
                mask |= 1 << i;
            }
        }
        mask
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// Which finite truncation of the multi-index set is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Every entry in `0..=N`: `(N+1)^M` indices.
    FullTensor,
    /// Total degree at most `N`: `C(M+N, N)` indices.
    TotalDegree,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::FullTensor => "tensor",
            Scheme::TotalDegree => "total",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        match s {
            "tensor" | "full-tensor" | "full_tensor" => Some(Scheme::FullTensor),
            "total" | "total-degree" | "total_degree" => Some(Scheme::TotalDegree),
            _ => None,
        }
    }

    /// Exact cardinality, saturating at `u128::MAX`.
    pub fn cardinality(self, modes: usize, degree_cap: u32) -> u128 {
        match self {
            Scheme::FullTensor => {
                let base = u128::from(degree_cap) + 1;
                let mut acc: u128 = 1;
                for _ in 0..modes {
                    acc = acc.saturating_mul(base);
                }
                acc
            }
            Scheme::TotalDegree => {
                // C(M+N, N) built incrementally; each partial product is an exact binomial.
                let n = u128::from(degree_cap);
                let mut acc: u128 = 1;
                for i in 1..=n {
                    acc = match acc.checked_mul(modes as u128 + i) {
                        Some(v) => v / i,
                        None => return u128::MAX,
                    };
                }
                acc
            }
        }
    }
}

/// Ordered, duplicate-free list of multi-indices (graded lexicographic).
#[derive(Debug, Clone)]
pub struct IndexSet {
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
    scheme: Scheme,
    modes: usize,
    degree_cap: u32,
    complete: bool,
}

impl PartialEq for IndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.indices == other.indices
            && self.scheme == other.scheme
            && self.modes == other.modes
            && self.degree_cap == other.degree_cap
            && self.complete == other.complete
    }
}

impl IndexSet {
    fn from_sorted(
        indices: Vec<MultiIndex>,
        scheme: Scheme,
        modes: usize,
        degree_cap: u32,
        complete: bool,
    ) -> Self {
        let positions = indices
            .iter()
            .enumerate()
            .map(|(i, idx)| (idx.clone(), i))
            .collect();
        IndexSet {
            indices,
            positions,
            scheme,
            modes,
            degree_cap,
            complete,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// False for sets produced by [`IndexSet::restrict`].
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, position: usize) -> &MultiIndex {
        &self.indices[position]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.positions.get(index).copied()
    }

    pub fn contains(&self, index: &MultiIndex) -> bool {
        self.positions.contains_key(index)
    }

    /// Position of the single-mode index for (0-based) mode `k`, if present.
    pub fn unit_position(&self, k: usize) -> Option<usize> {
        if k >= self.modes {
            return None;
        }
        self.position(&MultiIndex::unit(self.modes, k))
    }

    /// Sub-set keeping the given positions, in this set's order.
    pub fn restrict(&self, keep: &[usize]) -> IndexSet {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let indices = keep.iter().map(|&p| self.indices[p].clone()).collect();
        IndexSet::from_sorted(indices, self.scheme, self.modes, self.degree_cap, false)
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.indices.iter().all(|i| other.contains(i))
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;
    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// All indices of `scheme` for `modes` slots and degree cap `degree_cap`, in
/// graded-lex order (zero index first). Rejects sets larger than
/// [`DEFAULT_CARDINALITY_CAP`].
pub fn enumerate_indices(modes: usize, degree_cap: u32, scheme: Scheme) -> Result<IndexSet> {
    enumerate_indices_capped(modes, degree_cap, scheme, DEFAULT_CARDINALITY_CAP)
}

pub fn enumerate_indices_capped(
    modes: usize,
    degree_cap: u32,
    scheme: Scheme,
    cap: usize,
) -> Result<IndexSet> {
    if modes == 0 {
        return Err(Error::Config("mode count M must be at least 1".into()));
    }
    if modes > 64 {
        return Err(Error::Config(format!(
            "mode count M={modes} exceeds the supported 64"
        )));
    }
    let requested = scheme.cardinality(modes, degree_cap);
    if requested > cap as u128 {
        return Err(Error::Sizing { requested, cap });
    }
    let max_degree = match scheme {
        Scheme::FullTensor => degree_cap * modes as u32,
        Scheme::TotalDegree => degree_cap,
    };
    let mut out = Vec::with_capacity(requested as usize);
    let mut scratch = vec![0u32; modes];
    for d in 0..=max_degree {
        compositions(&mut scratch, 0, d, degree_cap, &mut out);
    }
    debug_assert_eq!(out.len() as u128, requested);
    Ok(IndexSet::from_sorted(out, scheme, modes, degree_cap, true))
}

// Lexicographically ascending compositions of `remaining` into the slots from
// `slot` on, each entry at most `cap`.
fn compositions(
    scratch: &mut [u32],
    slot: usize,
    remaining: u32,
    cap: u32,
    out: &mut Vec<MultiIndex>,
) {
    let last = scratch.len() - 1;
    if slot == last {
        if remaining <= cap {
            scratch[slot] = remaining;
            out.push(MultiIndex::new(scratch.to_vec()));
        }
        return;
    }
    let slots_after = (last - slot) as u32;
    for v in 0..=remaining.min(cap) {
        if remaining - v > slots_after * cap {
            continue;
        }
        scratch[slot] = v;
        compositions(scratch, slot + 1, remaining - v, cap, out);
    }
}

/// `λ_n = Σ_k n_k λ_k` for per-mode eigenvalues `spectrum` of `-A`.
pub fn ou_eigenvalue(index: &MultiIndex, spectrum: &[f64]) -> f64 {
    assert!(
        spectrum.len() >= index.len(),
        "spectrum has {} modes, index needs {}",
        spectrum.len(),
        index.len()
    );
    index
        .entries()
        .iter()
        .zip(spectrum)
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &lam)| {
            debug_assert!(lam > 0.0);
            f64::from(n) * lam
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tuples(set: &IndexSet) -> Vec<Vec<u32>> {
        set.iter().map(|i| i.entries().to_vec()).collect()
    }

    #[test]
    fn full_tensor_two_modes_degree_one() {
        let set = enumerate_indices(2, 1, Scheme::FullTensor).unwrap();
        assert_eq!(
            tuples(&set),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn degree_zero_is_only_the_zero_index() {
        for scheme in [Scheme::FullTensor, Scheme::TotalDegree] {
            let set = enumerate_indices(3, 0, scheme).unwrap();
            assert_eq!(tuples(&set), vec![vec![0, 0, 0]]);
        }
    }

    // Exhaustive oracle: filter the cube {0..=N}^M by total degree.
    fn brute_total_degree(modes: usize, cap: u32) -> usize {
        let mut count = 0;
        let total = (cap as usize + 1).pow(modes as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = 0;
            for _ in 0..modes {
                s += c % (cap as usize + 1);
                c /= cap as usize + 1;
            }
            if s <= cap as usize {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn total_degree_three_modes_degree_two_has_ten() {
        assert_eq!(brute_total_degree(3, 2), 10);
        let set = enumerate_indices(3, 2, Scheme::TotalDegree).unwrap();
        assert_eq!(set.len(), 10);
    }

    #[test]
    fn cardinalities_match_closed_forms() {
        for m in 1..=5 {
            for n in 0..=4u32 {
                let ft = enumerate_indices(m, n, Scheme::FullTensor).unwrap();
                assert_eq!(ft.len(), (n as usize + 1).pow(m as u32));
                let td = enumerate_indices(m, n, Scheme::TotalDegree).unwrap();
                assert_eq!(td.len(), brute_total_degree(m, n));
            }
        }
        assert_eq!(Scheme::TotalDegree.cardinality(8, 8), 12_870);
    }

    #[test]
    fn ordering_is_graded_lex_without_duplicates() {
        let set = enumerate_indices(3, 3, Scheme::FullTensor).unwrap();
        assert!(set.get(0).is_zero());
        for w in set.indices().windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert!((a.degree(), a.entries()) < (b.degree(), b.entries()));
        }
    }

    #[test]
    fn oversized_enumeration_is_rejected() {
        let err = enumerate_indices(8, 8, Scheme::FullTensor).unwrap_err();
        assert!(matches!(
            err,
            Error::Sizing {
                requested: 43_046_721,
                cap: 20_000
            }
        ));
        assert!(enumerate_indices(8, 8, Scheme::TotalDegree).is_ok());
        assert!(matches!(
            enumerate_indices(0, 2, Scheme::TotalDegree),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn ou_eigenvalue_examples() {
        let heat = |nu: f64, m: usize| {
            (1..=m)
                .map(|k| nu * PI * PI * (k * k) as f64)
                .collect::<Vec<_>>()
        };
        assert_eq!(ou_eigenvalue(&MultiIndex::zero(3), &heat(0.1, 3)), 0.0);
        let v = ou_eigenvalue(&MultiIndex::new(vec![1, 0, 2]), &heat(0.1, 3));
        assert!((v - 1.9 * PI * PI).abs() < 1e-12);
        assert!((v - 18.752).abs() < 1e-3);
        let w = ou_eigenvalue(&MultiIndex::new(vec![0, 1]), &heat(1.0, 2));
        assert!((w - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn restrict_keeps_order_and_lookup() {
        let set = enumerate_indices(2, 2, Scheme::TotalDegree).unwrap();
        let sub = set.restrict(&[4, 0, 2]);
        assert!(!sub.is_complete());
        assert_eq!(sub.len(), 3);
        assert!(sub.get(0).is_zero());
        assert_eq!(sub.position(set.get(4)), Some(2));
        assert!(sub.is_subset_of(&set));
    }

    #[test]
    fn padding_round_trip() {
        let a = MultiIndex::new(vec![1, 2]);
        let p = a.padded(4).unwrap();
        assert_eq!(p.entries(), &[1, 2, 0, 0]);
        assert_eq!(p.padded(2).unwrap(), a);
        assert!(p.padded(1).is_none());
    }

    proptest! {
        #[test]
        fn eigenvalue_is_additive(a in proptest::collection::vec(0u32..6, 4), b in proptest::collection::vec(0u32..6, 4), nu in 0.01f64..2.0) {
            let lams: Vec<f64> = (1..=4).map(|k| nu * PI * PI * (k * k) as f64).collect();
            let (ma, mb) = (MultiIndex::new(a), MultiIndex::new(b));
            let sum = ou_eigenvalue(&ma.add(&mb), &lams);
            let parts = ou_eigenvalue(&ma, &lams) + ou_eigenvalue(&mb, &lams);
            prop_assert!((sum - parts).abs() <= 1e-12 * sum.abs().max(1.0));
        }

        #[test]
        fn enumeration_is_deterministic_and_nested(m in 1usize..5, n in 0u32..4) {
            let t1 = enumerate_indices(m, n, Scheme::TotalDegree).unwrap();
            let t2 = enumerate_indices(m, n, Scheme::TotalDegree).unwrap();
            prop_assert_eq!(&t1, &t2);
            let ft = enumerate_indices(m, n, Scheme::FullTensor).unwrap();
            prop_assert!(t1.is_subset_of(&ft));
            for idx in &t1 {
                prop_assert_eq!(idx.len(), m);
                prop_assert!(idx.degree() <= n);
            }
        }
    }
}
