//! Extending conditions one rank at a time: deciding names, the repair
//! construction for preextensions, and the density operations built on it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{precondition, Error, Result};
use crate::names::NameRef;
use crate::poset::{ElementId, ElementSet};
use crate::slalom::PartialSlalom;

use super::{Atom, Forcing, NQCondition, Violation};

/// A candidate extension of `base` that may break the weight bound at rank
/// `gamma` and is repaired by [`Forcing::repair`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreExtension {
    pub base: NQCondition,
    pub gamma: usize,
    pub candidate: NQCondition,
}

impl PreExtension {
    pub fn new(base: NQCondition, gamma: usize, candidate: NQCondition) -> Self {
        PreExtension { base, gamma, candidate }
    }
}

impl Forcing<'_> {
    /// Every failed clause of "candidate is a `gamma`-preextension of base".
    pub fn preextension_violations(&self, pre: &PreExtension) -> Result<Vec<Violation>> {
        let (p, c, gamma) = (&pre.base, &pre.candidate, pre.gamma);
        let mut out = self.validate_except(c, None, Some(gamma));
        let above = |x: ElementId| self.rank(x) > gamma;
        for &x in p.entries.keys() {
            if !c.contains(x) {
                out.push(self.violation("pre-1", Some(x), "coordinate of the base is missing".into()));
            }
        }
        for &x in c.entries.keys() {
            if above(x) && !p.contains(x) {
                out.push(self.violation("pre-1", Some(x), "new coordinate above rank gamma".into()));
            }
        }
        if let Some(v) = self.leq_failure(&self.restrict_below(c, gamma), &self.restrict_below(p, gamma))? {
            out.push(self.violation("pre-2", None, format!("below gamma: {v}")));
        }
        for (&x, ac) in &c.entries {
            match (self.rank(x) == gamma, p.get(x)) {
                (true, Some(ap)) => {
                    if ac.s != ap.s || ac.f != ap.f || ac.w < ap.w {
                        out.push(self.violation("pre-3", Some(x), "rank-gamma coordinate altered".into()));
                    }
                }
                (true, None) => {
                    if !ac.f.is_empty() || ac.w != 0 {
                        out.push(self.violation("pre-4", Some(x), "new coordinate needs w = 0, F = ∅".into()));
                    }
                }
                (false, Some(ap)) if above(x) => {
                    if ac != ap {
                        out.push(self.violation("pre-5", Some(x), "coordinate above gamma altered".into()));
                    }
                }
                _ => {}
            }
        }
        Ok(out)
    }

    /// An extension of `p` that decides every listed name below `l`: each
    /// rank-trace name `r[a]` gets `a` joined and its slalom prolonged to
    /// length `l`, in element order.
    pub fn decide_names(
        &self,
        p: &NQCondition,
        names: &BTreeSet<NameRef>,
        l: usize,
        within: Option<&ElementSet>,
    ) -> Result<NQCondition> {
        let mut q = p.clone();
        let elems: BTreeSet<ElementId> = names
            .iter()
            .filter_map(|n| match n {
                NameRef::RSlalom(a) => Some(*a),
                NameRef::Check(_) => None,
            })
            .collect();
        if let Some(b) = within {
            for name in names {
                precondition!(
                    name.support(self.poset).is_subset(b),
                    "support of {} leaves the allowed set",
                    name.display(self.poset)
                );
            }
        }
        for a in elems {
            if !q.contains(a) {
                q = self.join(&q, a)?;
            }
            if q.entries[&a].s.len() < l {
                q = self.prolong(&q, self.rank(a), l)?;
            }
        }
        if self.self_check && q != *p {
            self.check_condition(&q, "decide_names")?;
            self.check_leq(&q, p, "decide_names")?;
        }
        Ok(q)
    }

    /// Turns a `gamma`-preextension into a condition: rank-`gamma` slaloms
    /// are extended to length `L = max(Σ w + l, n_min)` with the decided
    /// values of the names below, everything above `gamma` is kept.
    pub fn repair(&self, pre: &PreExtension, n_min: usize) -> Result<NQCondition> {
        let (p, p1, gamma) = (&pre.base, &pre.candidate, pre.gamma);
        let dg = self.stratum(p1, gamma);
        precondition!(!dg.is_empty(), "preextension has no coordinate of rank {gamma}");
        let v = self.preextension_violations(pre)?;
        precondition!(
            v.is_empty(),
            "not a {gamma}-preextension: {}",
            v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        );
        let l0 = p1.entries[&dg[0]].s.len();
        let l = (self.weight_sum(p1, &dg) + l0).max(n_min);
        let names: BTreeSet<NameRef> = dg.iter().flat_map(|x| p1.entries[x].f.iter().cloned()).collect();
        let q_star = self.decide_names(&self.restrict_below(p1, gamma), &names, l, None)?;
        let dpg = self.stratum(p, gamma);
        let mut k = BTreeMap::new();
        for &z in &dpg {
            for n in l0..l {
                k.insert((z, n), self.k_set(&q_star, z, &p.entries[&z].f, n)?);
            }
        }
        let mut q = q_star;
        for &x in &dg {
            let a1 = &p1.entries[&x];
            let mut s = a1.s.clone();
            let below = if dpg.contains(&x) { self.same_rank_down(p, x) } else { Vec::new() };
            for n in l0..l {
                let entry = below.iter().flat_map(|z| k[&(*z, n)].iter().cloned()).collect();
                s.push(entry).map_err(|e| Error::CertificateFailure(format!("repair: {e}")))?;
            }
            q.insert(x, Atom::new(s, a1.w, a1.f.clone()));
        }
        let q = q.merged(&p1.filter(|x| self.rank(x) > gamma));
        if self.self_check {
            self.check_condition(&q, "repair")?;
            self.check_leq(&q, p, "repair")?;
            self.check_leq(&self.restrict_below(&q, gamma), &self.restrict_below(p1, gamma), "repair")?;
        }
        Ok(q)
    }

    /// An extension with `l_ξ >= n`.
    pub fn prolong(&self, p: &NQCondition, xi: usize, n: usize) -> Result<NQCondition> {
        let l = self.length_at(p, xi);
        precondition!(l.is_some(), "rank {xi} does not occur in the condition");
        if l.unwrap() >= n {
            return Ok(p.clone());
        }
        self.repair(&PreExtension::new(p.clone(), xi, p.clone()), n)
    }

    /// An extension with `a` in its domain.
    pub fn join(&self, p: &NQCondition, a: ElementId) -> Result<NQCondition> {
        precondition!(self.poset.contains(a), "unknown element {a}");
        if p.contains(a) {
            return Ok(p.clone());
        }
        let alpha = self.rank(a);
        match self.length_at(p, alpha) {
            None => {
                let mut q = p.clone();
                q.insert(a, Atom::new(PartialSlalom::empty(), 0, BTreeSet::new()));
                if self.self_check {
                    self.check_condition(&q, "join")?;
                    self.check_leq(&q, p, "join")?;
                }
                Ok(q)
            }
            Some(l) => {
                let mut p1 = p.clone();
                p1.insert(a, Atom::blank(l));
                self.repair(&PreExtension::new(p.clone(), alpha, p1), 0)
            }
        }
    }

    /// An extension with `w_a` raised by one (so `w_a >= |F_a| + 1`).
    pub fn bump_weight(&self, p: &NQCondition, a: ElementId) -> Result<NQCondition> {
        precondition!(p.contains(a), "{} not in the domain", self.poset.name(a));
        let mut p1 = p.clone();
        p1.get_mut(a).unwrap().w += 1;
        self.repair(&PreExtension::new(p.clone(), self.rank(a), p1), 0)
    }

    /// An extension with `name ∈ F_a`; `a` is joined first if needed.
    pub fn add_name(&self, p: &NQCondition, a: ElementId, name: &NameRef) -> Result<NQCondition> {
        precondition!(self.poset.contains(a), "unknown element {a}");
        if let NameRef::RSlalom(y) = name {
            precondition!(self.poset.contains(*y), "unknown element {y}");
        }
        precondition!(
            name.support(self.poset).is_subset(&self.poset.q_of(a)),
            "{} is not a name over Q_{}",
            name.display(self.poset),
            self.poset.name(a)
        );
        let q = self.join(p, a)?;
        let mut q = self.bump_weight(&q, a)?;
        q.get_mut(a).unwrap().f.insert(name.clone());
        if self.self_check {
            self.check_condition(&q, "add_name")?;
            self.check_leq(&q, p, "add_name")?;
        }
        Ok(q)
    }

    /// `(p ∈ W, q)` with `q <= p` in `W`.
    pub fn w_dense(&self, p: &NQCondition) -> Result<(bool, NQCondition)> {
        if self.in_w(p) {
            return Ok((true, p.clone()));
        }
        let q = self.w_dense_below(p)?;
        if self.self_check {
            self.check_condition(&q, "w_dense")?;
            self.check_leq(&q, p, "w_dense")?;
            if !self.in_w(&q) {
                return Err(Error::CertificateFailure("w_dense: result not in W".into()));
            }
        }
        Ok((false, q))
    }

    fn w_dense_below(&self, p: &NQCondition) -> Result<NQCondition> {
        let Some(&gamma) = self.ranks(p).iter().next_back() else {
            return Ok(p.clone());
        };
        let mut p1 = p.clone();
        for x in self.stratum(p, gamma) {
            let a = p1.get_mut(x).unwrap();
            a.w = a.w.max(2 * a.f.len());
        }
        let n = 2 * self.weight_sum(&p1, &self.stratum(&p1, gamma));
        let q = self.repair(&PreExtension::new(p.clone(), gamma, p1), n)?;
        let q_star = self.w_dense_below(&self.restrict_below(&q, gamma))?;
        self.combine(&q_star, &q, gamma)
    }
}
