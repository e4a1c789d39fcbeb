//! Partial slaloms and the finite-stage approximations of the null sets they
//! code.
//!
//! A slalom `phi` codes the null set `H_phi = ∩_N ∪_{n>N} ∪_{i∈phi(n)} C^n_i`.
//! Only finite stages are ever materialized: the tail unions
//! [`a_stage`], the rank trace [`r_phi`] (the canonical descending sequence of
//! stage sets avoiding `phi`), and the disjointness certificate between them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cantor::{CantorIndex, ClopenIndex, ClopenSet};
use crate::error::{certify, precondition, Error, Result};
use crate::ground::GroundFunction;
use crate::jsonint::JsonIndex;

/// A finite sequence `s(0), ..., s(L-1)` of finite index sets with
/// `|s(n)| <= n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialSlalom {
    entries: Vec<BTreeSet<ClopenIndex>>,
}

impl PartialSlalom {
    pub fn new(entries: Vec<BTreeSet<ClopenIndex>>) -> Result<Self> {
        for (n, e) in entries.iter().enumerate() {
            if e.len() > n {
                return Err(Error::Validation(format!(
                    "slalom entry {n} has {} elements, at most {n} allowed",
                    e.len()
                )));
            }
        }
        Ok(PartialSlalom { entries })
    }

    /// Builds a slalom from small integer entries.
    pub fn from_u64s(entries: &[&[u64]]) -> Result<Self> {
        PartialSlalom::new(
            entries
                .iter()
                .map(|e| e.iter().map(|&v| ClopenIndex::from(v)).collect())
                .collect(),
        )
    }

    pub fn empty() -> Self {
        PartialSlalom::default()
    }

    /// The all-empty slalom of the given length.
    pub fn blank(len: usize) -> Self {
        PartialSlalom {
            entries: vec![BTreeSet::new(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, n: usize) -> Option<&BTreeSet<ClopenIndex>> {
        self.entries.get(n)
    }

    pub fn entries(&self) -> &[BTreeSet<ClopenIndex>] {
        &self.entries
    }

    pub fn prefix(&self, len: usize) -> PartialSlalom {
        PartialSlalom {
            entries: self.entries[..len.min(self.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &PartialSlalom) -> bool {
        self.len() <= other.len() && self.entries[..] == other.entries[..self.len()]
    }

    /// Appends `s(len) = entry`.
    pub fn push(&mut self, entry: BTreeSet<ClopenIndex>) -> Result<()> {
        let n = self.len();
        if entry.len() > n {
            return Err(Error::Validation(format!(
                "slalom entry {n} would have {} elements, at most {n} allowed",
                entry.len()
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Replaces entry `n` (used to build deliberately altered copies).
    pub fn with_entry(&self, n: usize, entry: BTreeSet<ClopenIndex>) -> Result<PartialSlalom> {
        let mut entries = self.entries.clone();
        precondition!(n < entries.len(), "entry {n} out of range");
        entries[n] = entry;
        PartialSlalom::new(entries)
    }
}

impl fmt::Display for PartialSlalom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (n, e) in self.entries.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            let items: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            if items.is_empty() {
                f.write_str("∅")?;
            } else {
                write!(f, "{{{}}}", items.join(","))?;
            }
        }
        f.write_str("⟩")
    }
}

impl Serialize for PartialSlalom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<JsonIndex>> = self
            .entries
            .iter()
            .map(|e| e.iter().cloned().map(JsonIndex).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartialSlalom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<JsonIndex>> = Vec::deserialize(d)?;
        let mut entries = Vec::with_capacity(rows.len());
        for (n, row) in rows.into_iter().enumerate() {
            let len = row.len();
            let set: BTreeSet<ClopenIndex> = row.into_iter().map(|j| j.0).collect();
            if set.len() != len {
                return Err(serde::de::Error::custom(format!(
                    "slalom entry {n} has duplicate indices"
                )));
            }
            entries.push(set);
        }
        PartialSlalom::new(entries).map_err(serde::de::Error::custom)
    }
}

/// The rank trace `r(0), ..., r(M)` of a partial slalom with the stage sets
/// `C^n_{r(n)}` that certify it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTrace {
    pub values: Vec<ClopenIndex>,
    pub sets: Vec<ClopenSet>,
}

impl RankTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `R_M = ∩_{n<=M} C^n_{r(n)}`; the stage sets are nested, so this is
    /// the last one.
    pub fn r_set(&self, m: usize) -> &ClopenSet {
        &self.sets[m]
    }
}

/// `∪_{N<n<=M} ∪_{i∈phi(n)} C^n_i`.
pub fn a_stage(phi: &PartialSlalom, lo: usize, hi: usize, index: &CantorIndex) -> Result<ClopenSet> {
    precondition!(
        hi < phi.len(),
        "stage {hi} outside slalom of length {}",
        phi.len()
    );
    let mut acc = ClopenSet::empty();
    for n in (lo + 1)..=hi {
        for i in &phi.entries[n] {
            acc = acc.union(&index.set_at(n, i)?);
        }
    }
    Ok(acc)
}

/// The canonical rank trace: `r(0) = 0` and `r(n)` is the least index of a
/// stage-`n` set inside `C^{n-1}_{r(n-1)}` avoiding every `C^n_j`, `j ∈ phi(n)`.
pub fn r_phi(phi: &PartialSlalom, index: &CantorIndex) -> Result<RankTrace> {
    precondition!(!phi.is_empty(), "rank trace needs a slalom of length >= 1");
    extend_trace(
        RankTrace {
            values: Vec::new(),
            sets: Vec::new(),
        },
        phi,
        index,
    )
}

/// Continues `trace` (a trace of a prefix of `phi`) to the full length of `phi`.
pub fn extend_trace(mut trace: RankTrace, phi: &PartialSlalom, index: &CantorIndex) -> Result<RankTrace> {
    if trace.is_empty() && !phi.is_empty() {
        index.scale().get(0)?;
        trace.values.push(ClopenIndex::from(0u32));
        trace.sets.push(index.set_at(0, &ClopenIndex::from(0u32))?);
    }
    for n in trace.len()..phi.len() {
        let mut container = trace.sets[n - 1].clone();
        for j in &phi.entries[n] {
            container = container.difference(&index.set_at(n, j)?);
        }
        let r = index.min_index_inside(n, &container)?;
        let set = index.set_at(n, &r)?;
        certify!(
            set.is_subset(&container),
            "C^{n}_{r} is not inside its container"
        );
        trace.values.push(r);
        trace.sets.push(set);
    }
    Ok(trace)
}

/// The pair `(R_M, A_M)` with its machine-checked facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointnessCertificate {
    pub stage: usize,
    pub r_set: ClopenSet,
    pub a_set: ClopenSet,
}

/// Certifies that `R_M` is nonempty, has measure `2^(-h(M))`, and misses `A_M`.
pub fn r_stage_disjointness(
    phi: &PartialSlalom,
    m: usize,
    index: &CantorIndex,
) -> Result<DisjointnessCertificate> {
    precondition!(m < phi.len(), "stage {m} outside slalom of length {}", phi.len());
    let trace = r_phi(&phi.prefix(m + 1), index)?;
    let mut r_set = ClopenSet::whole();
    for s in &trace.sets {
        r_set = r_set.intersect(s);
    }
    let a_set = a_stage(phi, 0, m, index)?;
    certify!(!r_set.is_empty(), "R_{m} is empty");
    certify!(
        r_set.measure() == index.stage_measure(m)?,
        "R_{m} has measure {}",
        r_set.measure()
    );
    certify!(r_set.is_disjoint(&a_set), "R_{m} meets A_{m}");
    Ok(DisjointnessCertificate {
        stage: m,
        r_set,
        a_set,
    })
}

/// Whether `f(n) ∈ phi(n)` for every `n` in `(lo, hi]`. When it holds, the
/// containment `∪ C^n_{f(n)} ⊆ a_stage(phi, lo, hi)` is checked as well.
pub fn coverage_check(
    f: &GroundFunction,
    phi: &PartialSlalom,
    lo: usize,
    hi: usize,
    index: &CantorIndex,
) -> Result<bool> {
    precondition!(hi < phi.len(), "stage {hi} outside slalom of length {}", phi.len());
    let covered = ((lo + 1)..=hi).all(|n| phi.entries[n].contains(&f.eval(n)));
    if covered {
        let mut f_union = ClopenSet::empty();
        for n in (lo + 1)..=hi {
            f_union = f_union.union(&index.set_at(n, &f.eval(n))?);
        }
        certify!(
            f_union.is_subset(&a_stage(phi, lo, hi, index)?),
            "pointwise coverage without set containment"
        );
    }
    Ok(covered)
}
