//! The ranked iteration of weighted localization. A condition assigns to
//! finitely many poset elements `x` a triple `(s_x, w_x, F_x)`: a partial
//! slalom, a weight, and a finite set of names the slalom must eventually
//! localize.
//!
//! Every construction here returns a condition and, unless self-checks are
//! switched off, verifies its output against [`Forcing::validate`] and
//! [`Forcing::leq`] before returning.

mod amalgamate;
pub mod codec;
mod delta;
mod repair;
mod witness;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::cantor::{CantorIndex, ClopenIndex};
use crate::error::{certify, precondition, Error, Result};
use crate::names::{decide_with, NameRef, TraceCache};
use crate::poset::{ElementId, ElementSet, RankedPoset, MAX_STRATUM};
use crate::slalom::PartialSlalom;

pub use delta::DeltaViolation;
pub use repair::PreExtension;
pub use witness::Witness;

/// One coordinate `(s, w, F)` of a condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub s: PartialSlalom,
    pub w: usize,
    pub f: BTreeSet<NameRef>,
}

impl Atom {
    pub fn new(s: PartialSlalom, w: usize, f: BTreeSet<NameRef>) -> Self {
        Atom { s, w, f }
    }

    /// All-empty slalom of length `len`, weight 0, no names.
    pub fn blank(len: usize) -> Self {
        Atom::new(PartialSlalom::blank(len), 0, BTreeSet::new())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NQCondition {
    entries: BTreeMap<ElementId, Atom>,
}

impl NQCondition {
    pub fn empty() -> Self {
        NQCondition::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (ElementId, Atom)>) -> Self {
        NQCondition {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<ElementId, Atom> {
        &self.entries
    }

    pub fn get(&self, x: ElementId) -> Option<&Atom> {
        self.entries.get(&x)
    }

    pub fn get_mut(&mut self, x: ElementId) -> Option<&mut Atom> {
        self.entries.get_mut(&x)
    }

    pub fn insert(&mut self, x: ElementId, atom: Atom) -> Option<Atom> {
        self.entries.insert(x, atom)
    }

    pub fn remove(&mut self, x: ElementId) -> Option<Atom> {
        self.entries.remove(&x)
    }

    pub fn contains(&self, x: ElementId) -> bool {
        self.entries.contains_key(&x)
    }

    pub fn domain(&self) -> ElementSet {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn slalom(&self, x: ElementId) -> Option<&PartialSlalom> {
        self.entries.get(&x).map(|a| &a.s)
    }

    /// `p↾A`.
    pub fn restrict_to(&self, a: &ElementSet) -> NQCondition {
        self.filter(|x| a.contains(&x))
    }

    pub fn filter(&self, keep: impl Fn(ElementId) -> bool) -> NQCondition {
        NQCondition {
            entries: self
                .entries
                .iter()
                .filter(|(x, _)| keep(**x))
                .map(|(x, a)| (*x, a.clone()))
                .collect(),
        }
    }

    /// `self ∪ other`, with `other` winning on shared coordinates.
    pub fn merged(&self, other: &NQCondition) -> NQCondition {
        let mut out = self.clone();
        for (x, a) in &other.entries {
            out.entries.insert(*x, a.clone());
        }
        out
    }
}

/// A failed clause of the condition definition or of a companion check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: String,
    pub coordinate: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {}", self.clause)?;
        if let Some(c) = &self.coordinate {
            write!(f, " at {c}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// The forcing over a fixed poset and clopen enumeration.
pub struct Forcing<'a> {
    poset: &'a RankedPoset,
    traces: TraceCache<'a>,
    self_check: bool,
}

impl<'a> Forcing<'a> {
    pub fn new(poset: &'a RankedPoset, index: &'a CantorIndex) -> Self {
        Forcing {
            poset,
            traces: TraceCache::new(index),
            self_check: true,
        }
    }

    /// Skips the output checks inside constructions. Callers are expected to
    /// check results themselves.
    pub fn without_self_checks(mut self) -> Self {
        self.self_check = false;
        self
    }

    pub fn poset(&self) -> &'a RankedPoset {
        self.poset
    }

    pub fn index(&self) -> &'a CantorIndex {
        self.traces.index()
    }

    pub fn traces(&self) -> &TraceCache<'a> {
        &self.traces
    }

    pub fn rank(&self, x: ElementId) -> usize {
        self.poset.rank(x)
    }

    /// `bar(D^p)`.
    pub fn ranks(&self, p: &NQCondition) -> BTreeSet<usize> {
        p.entries.keys().map(|&x| self.rank(x)).collect()
    }

    /// `D^p_ξ` in element order.
    pub fn stratum(&self, p: &NQCondition, xi: usize) -> Vec<ElementId> {
        p.entries.keys().copied().filter(|&x| self.rank(x) == xi).collect()
    }

    /// `l^p_ξ`.
    pub fn length_at(&self, p: &NQCondition, xi: usize) -> Option<usize> {
        p.entries
            .iter()
            .find(|(x, _)| self.rank(**x) == xi)
            .map(|(_, a)| a.s.len())
    }

    pub fn weight_sum<'b>(&self, p: &NQCondition, xs: impl IntoIterator<Item = &'b ElementId>) -> usize {
        xs.into_iter().map(|x| p.get(*x).map_or(0, |a| a.w)).sum()
    }

    /// `D^p_{<=x}`.
    pub fn same_rank_down(&self, p: &NQCondition, x: ElementId) -> Vec<ElementId> {
        let xi = self.rank(x);
        p.entries
            .keys()
            .copied()
            .filter(|&y| self.rank(y) == xi && self.poset.leq(y, x))
            .collect()
    }

    /// `p↾b`: the coordinates in `Q_b`.
    pub fn restrict_element(&self, p: &NQCondition, b: ElementId) -> NQCondition {
        p.filter(|x| self.poset.ll(x, b))
    }

    /// `p↾ξ`: the coordinates of rank below `ξ`.
    pub fn restrict_below(&self, p: &NQCondition, xi: usize) -> NQCondition {
        p.filter(|x| self.rank(x) < xi)
    }

    /// `p↾{ξ}`.
    pub fn restrict_rank(&self, p: &NQCondition, xi: usize) -> NQCondition {
        p.filter(|x| self.rank(x) == xi)
    }

    /// `p↾[ξ,∞)`.
    pub fn restrict_from(&self, p: &NQCondition, xi: usize) -> NQCondition {
        p.filter(|x| self.rank(x) >= xi)
    }

    /// The value of `name` at `n` as decided by `c`, if it is.
    pub fn decide(&self, name: &NameRef, c: &NQCondition, n: usize) -> Result<Option<ClopenIndex>> {
        decide_with(name, n, |a| c.slalom(a), &self.traces)
    }

    /// The value of `name` at `n` as decided by `c↾x`.
    pub fn decide_under(
        &self,
        name: &NameRef,
        c: &NQCondition,
        x: ElementId,
        n: usize,
    ) -> Result<Option<ClopenIndex>> {
        decide_with(
            name,
            n,
            |a| if self.poset.ll(a, x) { c.slalom(a) } else { None },
            &self.traces,
        )
    }

    /// `{f(n) : f ∈ F_x}` as decided by `c↾x`; every name must be decided.
    pub(crate) fn k_set(
        &self,
        c: &NQCondition,
        x: ElementId,
        names: &BTreeSet<NameRef>,
        n: usize,
    ) -> Result<BTreeSet<ClopenIndex>> {
        let mut out = BTreeSet::new();
        for name in names {
            match self.decide_under(name, c, x, n)? {
                Some(v) => {
                    out.insert(v);
                }
                None => {
                    return Err(Error::CertificateFailure(format!(
                        "{} undecided at {n} below {}",
                        name.display(self.poset),
                        self.poset.name(x)
                    )))
                }
            }
        }
        Ok(out)
    }

    fn violation(&self, clause: &str, x: Option<ElementId>, message: String) -> Violation {
        Violation {
            clause: clause.to_string(),
            coordinate: x.map(|x| self.poset.name(x).to_string()),
            message,
        }
    }

    /// Clauses 1 to 4 of the condition definition, with the domain required to
    /// lie in `ambient` when given.
    pub fn validate(&self, p: &NQCondition, ambient: Option<&ElementSet>) -> Vec<Violation> {
        self.validate_except(p, ambient, None)
    }

    pub fn is_valid(&self, p: &NQCondition) -> bool {
        self.validate(p, None).is_empty()
    }

    /// As [`Forcing::validate`], but clause 3 is not applied at rank
    /// `exempt` (the relaxed clause of a precondition).
    pub(crate) fn validate_except(
        &self,
        p: &NQCondition,
        ambient: Option<&ElementSet>,
        exempt: Option<usize>,
    ) -> Vec<Violation> {
        let mut out = Vec::new();
        for (&x, atom) in &p.entries {
            if !self.poset.contains(x) {
                out.push(self.violation("1", None, format!("unknown coordinate {x}")));
                continue;
            }
            if let Some(a) = ambient {
                if !a.contains(&x) {
                    out.push(self.violation("1", Some(x), "coordinate outside the ambient set".into()));
                }
            }
            if atom.f.len() > atom.w {
                out.push(self.violation(
                    "2",
                    Some(x),
                    format!("|F| = {} exceeds w = {}", atom.f.len(), atom.w),
                ));
            }
            let qx = self.poset.q_of(x);
            for name in &atom.f {
                if let NameRef::RSlalom(y) = name {
                    if !self.poset.contains(*y) {
                        out.push(self.violation("2", Some(x), format!("name refers to unknown element {y}")));
                        continue;
                    }
                }
                if !name.support(self.poset).is_subset(&qx) {
                    out.push(self.violation(
                        "2",
                        Some(x),
                        format!("support of {} is not inside Q_x", name.display(self.poset)),
                    ));
                }
            }
            if exempt != Some(self.rank(x)) {
                let total = self.weight_sum(p, &self.same_rank_down(p, x));
                if total > atom.s.len() {
                    out.push(self.violation(
                        "3",
                        Some(x),
                        format!("same-rank weight below is {total} > len(s) = {}", atom.s.len()),
                    ));
                }
            }
        }
        for xi in self.ranks(p) {
            let st = self.stratum(p, xi);
            let l0 = p.entries[&st[0]].s.len();
            for &y in &st[1..] {
                let l = p.entries[&y].s.len();
                if l != l0 {
                    out.push(self.violation(
                        "4",
                        Some(y),
                        format!("length {l} differs from {l0} at {} (rank {xi})", self.poset.name(st[0])),
                    ));
                }
            }
        }
        out
    }

    /// `p <= q`.
    pub fn leq(&self, p: &NQCondition, q: &NQCondition) -> Result<bool> {
        Ok(self.leq_failure(p, q)?.is_none())
    }

    /// The first clause of the order that fails for `p <= q`, if any.
    pub fn leq_failure(&self, p: &NQCondition, q: &NQCondition) -> Result<Option<Violation>> {
        // clause 5
        for &x in q.entries.keys() {
            if !p.contains(x) {
                return Ok(Some(self.violation("5", Some(x), "coordinate missing from extension".into())));
            }
        }
        // clause 6
        for (&x, aq) in &q.entries {
            let ap = &p.entries[&x];
            if !aq.s.is_prefix_of(&ap.s) {
                return Ok(Some(self.violation("6", Some(x), "slalom does not extend".into())));
            }
            if ap.w < aq.w {
                return Ok(Some(self.violation("6", Some(x), format!("weight drops {} -> {}", aq.w, ap.w))));
            }
            if !aq.f.is_subset(&ap.f) {
                return Ok(Some(self.violation("6", Some(x), "names dropped".into())));
            }
            for n in aq.s.len()..ap.s.len() {
                let entry = ap.s.entry(n).unwrap();
                for name in &aq.f {
                    match self.decide_under(name, p, x, n)? {
                        Some(v) if entry.contains(&v) => {}
                        Some(v) => {
                            return Ok(Some(self.violation(
                                "6",
                                Some(x),
                                format!("{}({n}) = {v} not in s({n})", name.display(self.poset)),
                            )))
                        }
                        None => {
                            return Ok(Some(self.violation(
                                "6",
                                Some(x),
                                format!("{}({n}) undecided", name.display(self.poset)),
                            )))
                        }
                    }
                }
            }
        }
        for xi in self.ranks(q) {
            let dq = self.stratum(q, xi);
            let lq = q.entries[&dq[0]].s.len();
            let lp = p.entries[&dq[0]].s.len();
            // clause 7
            for &x in &dq {
                for &y in &dq {
                    if self.poset.less(x, y) {
                        for n in lq..lp {
                            let (sx, sy) = (p.entries[&x].s.entry(n), p.entries[&y].s.entry(n));
                            if !matches!((sx, sy), (Some(sx), Some(sy)) if sx.is_subset(sy)) {
                                return Ok(Some(self.violation(
                                    "7",
                                    Some(x),
                                    format!("s({n}) not inside that of {}", self.poset.name(y)),
                                )));
                            }
                        }
                    }
                }
            }
            // clause 8
            let wp = self.weight_sum(p, &self.stratum(p, xi));
            let wq = self.weight_sum(q, &dq);
            if wp > wq + (lp - lq) {
                return Ok(Some(self.violation(
                    "8",
                    None,
                    format!("rank {xi}: weight {wp} > {wq} + {}", lp - lq),
                )));
            }
            // clause 9
            if dq.len() > MAX_STRATUM {
                return Err(Error::PreconditionViolated(format!(
                    "stratum of rank {xi} has {} coordinates (limit {MAX_STRATUM})",
                    dq.len()
                )));
            }
            let masks = self.poset.downward_closed_masks(&dq);
            for n in lq..lp {
                for &mask in &masks {
                    let mut union = BTreeSet::new();
                    let mut w = 0;
                    for (i, x) in dq.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            if let Some(e) = p.entries[x].s.entry(n) {
                                union.extend(e.iter());
                            }
                            w += q.entries[x].w;
                        }
                    }
                    if union.len() > w + (n - lq) {
                        return Ok(Some(self.violation(
                            "9",
                            None,
                            format!(
                                "rank {xi}, n = {n}: union over {:?} has {} > {w} + {}",
                                dq.iter()
                                    .enumerate()
                                    .filter(|(i, _)| mask >> i & 1 == 1)
                                    .map(|(_, x)| self.poset.name(*x))
                                    .collect::<Vec<_>>(),
                                union.len(),
                                n - lq
                            ),
                        )));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Membership in the dense set `W`: `2|F_x| <= w_x` everywhere and
    /// `2 Σ w <= l` on every rank.
    pub fn in_w(&self, p: &NQCondition) -> bool {
        p.entries.values().all(|a| 2 * a.f.len() <= a.w)
            && self.ranks(p).into_iter().all(|xi| {
                2 * self.weight_sum(p, &self.stratum(p, xi)) <= self.length_at(p, xi).unwrap()
            })
    }

    /// `q ∪ p↾[ξ,∞)` for `q` over `Q_{<ξ}` extending `p↾ξ`.
    pub fn combine(&self, q: &NQCondition, p: &NQCondition, xi: usize) -> Result<NQCondition> {
        precondition!(
            q.entries.keys().all(|&x| self.rank(x) < xi),
            "first condition has coordinates of rank >= {xi}"
        );
        precondition!(
            self.leq(q, &self.restrict_below(p, xi))?,
            "first condition does not extend the restriction below rank {xi}"
        );
        let out = q.merged(&self.restrict_from(p, xi));
        if self.self_check {
            self.check_condition(&out, "combine")?;
            self.check_leq(&out, p, "combine")?;
            self.check_leq(&out, q, "combine")?;
        }
        Ok(out)
    }

    pub(crate) fn check_condition(&self, p: &NQCondition, what: &str) -> Result<()> {
        let v = self.validate(p, None);
        certify!(
            v.is_empty(),
            "{what} produced an invalid condition: {}",
            v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        );
        Ok(())
    }

    pub(crate) fn check_leq(&self, p: &NQCondition, q: &NQCondition, what: &str) -> Result<()> {
        if let Some(v) = self.leq_failure(p, q)? {
            return Err(Error::CertificateFailure(format!("{what}: result does not extend: {v}")));
        }
        Ok(())
    }

    pub fn self_checks(&self) -> bool {
        self.self_check
    }

    pub fn display<'b>(&'b self, p: &'b NQCondition) -> impl fmt::Display + 'b {
        struct D<'b, 'a>(&'b Forcing<'a>, &'b NQCondition);
        impl fmt::Display for D<'_, '_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.1.is_empty() {
                    return f.write_str("{}");
                }
                for (i, (x, a)) in self.1.entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    let names: Vec<String> =
                        a.f.iter().map(|n| n.display(self.0.poset).to_string()).collect();
                    write!(
                        f,
                        "{}: s={} w={} F={{{}}}",
                        self.0.poset.name(*x),
                        a.s,
                        a.w,
                        names.join(", ")
                    )?;
                }
                Ok(())
            }
        }
        D(self, p)
    }
}

#[cfg(test)]
mod tests;
