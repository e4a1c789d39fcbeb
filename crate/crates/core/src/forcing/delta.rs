//! Common extensions of two conditions in `W` forming a Δ-system pair: equal
//! data on shared coordinates, equal lengths on shared ranks, and matching
//! name counts below every set of shared coordinates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::cantor::ClopenIndex;
use crate::error::{Error, Result};
use crate::names::NameRef;
use crate::poset::ElementId;

use super::{Atom, Forcing, NQCondition};

/// Why a pair does not qualify for [`Forcing::delta_pair_extend`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaViolation {
    /// `"W"` for membership in the dense set, otherwise the number of the
    /// violated agreement condition.
    pub condition: String,
    pub message: String,
}

impl fmt::Display for DeltaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agreement condition {}: {}", self.condition, self.message)
    }
}

impl Forcing<'_> {
    /// The first failed agreement condition of the pair, if any.
    pub fn check_delta_pair(&self, p: &NQCondition, q: &NQCondition) -> Option<DeltaViolation> {
        let fail = |c: &str, m: String| {
            Some(DeltaViolation {
                condition: c.to_string(),
                message: m,
            })
        };
        if !self.in_w(p) {
            return fail("W", "first condition is not in W".into());
        }
        if !self.in_w(q) {
            return fail("W", "second condition is not in W".into());
        }
        // (1) and (3): the roots of a two-element family are the intersections
        let u_ranks: BTreeSet<usize> = self.ranks(p).intersection(&self.ranks(q)).copied().collect();
        let root: Vec<ElementId> = p.domain().intersection(&q.domain()).copied().collect();
        for &xi in &u_ranks {
            let (lp, lq) = (self.length_at(p, xi).unwrap(), self.length_at(q, xi).unwrap());
            if lp != lq {
                return fail("2", format!("rank {xi}: lengths {lp} and {lq}"));
            }
        }
        for &x in &root {
            let (a, b) = (&p.entries[&x], &q.entries[&x]);
            if a.s != b.s || a.w != b.w {
                return fail("4", format!("root coordinate {} differs", self.poset.name(x)));
            }
        }
        if root.len() > 16 {
            return fail("5", format!("root of {} coordinates is too large to check", root.len()));
        }
        let count = |c: &NQCondition, mask: u32| -> usize {
            let below: BTreeSet<ElementId> = root
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .flat_map(|(_, &x)| self.same_rank_down(c, x))
                .collect();
            below.iter().map(|z| c.entries[z].f.len()).sum()
        };
        for mask in 1u32..(1 << root.len()) {
            let (kp, kq) = (count(p, mask), count(q, mask));
            if kp != kq {
                let sub: Vec<&str> = root
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &x)| self.poset.name(x))
                    .collect();
                return fail("5", format!("name counts below {sub:?}: {kp} and {kq}"));
            }
        }
        None
    }

    /// A common extension of a Δ-system pair in `W`, built rank by rank over
    /// the union of their ranks.
    pub fn delta_pair_extend(&self, p: &NQCondition, q: &NQCondition) -> Result<NQCondition> {
        if let Some(v) = self.check_delta_pair(p, q) {
            return Err(Error::PreconditionViolated(v.to_string()));
        }
        let (rp, rq) = (self.ranks(p), self.ranks(q));
        let mut r = NQCondition::empty();
        for &gamma in rp.union(&rq) {
            match (rp.contains(&gamma), rq.contains(&gamma)) {
                (true, false) => r = r.merged(&self.restrict_rank(p, gamma)),
                (false, true) => r = r.merged(&self.restrict_rank(q, gamma)),
                _ => r = self.delta_root_rank(&r, p, q, gamma)?,
            }
        }
        if self.self_check {
            self.check_condition(&r, "delta_pair_extend")?;
            self.check_leq(&r, p, "delta_pair_extend")?;
            self.check_leq(&r, q, "delta_pair_extend")?;
        }
        Ok(r)
    }

    fn delta_root_rank(
        &self,
        r_prev: &NQCondition,
        p: &NQCondition,
        q: &NQCondition,
        gamma: usize,
    ) -> Result<NQCondition> {
        let dp = self.stratum(p, gamma);
        let dq = self.stratum(q, gamma);
        let lg = p.entries[&dp[0]].s.len();
        let l = self.weight_sum(p, &dp) + self.weight_sum(q, &dq) + lg;
        let mut fsets: BTreeMap<ElementId, BTreeSet<NameRef>> = BTreeMap::new();
        for (c, d) in [(p, &dp), (q, &dq)] {
            for x in d.iter() {
                fsets.entry(*x).or_default().extend(c.entries[x].f.iter().cloned());
            }
        }
        let names: BTreeSet<NameRef> = fsets.values().flatten().cloned().collect();
        let r_star = self.decide_names(r_prev, &names, l, None)?;
        let mut k: BTreeMap<(ElementId, usize), BTreeSet<ClopenIndex>> = BTreeMap::new();
        for (&z, f) in &fsets {
            for n in lg..l {
                k.insert((z, n), self.k_set(&r_star, z, f, n)?);
            }
        }
        let all: Vec<ElementId> = fsets.keys().copied().collect();
        let shared: Vec<ElementId> = dp.iter().copied().filter(|x| dq.contains(x)).collect();
        let le = |z: ElementId, x: ElementId| self.poset.leq(z, x);
        // z counts toward x through the own side, or through a shared z' with z <= z' <= x
        let contributors = |x: ElementId, own: &[ElementId]| -> Vec<ElementId> {
            if shared.contains(&x) {
                return all.iter().copied().filter(|&z| le(z, x)).collect();
            }
            all.iter()
                .copied()
                .filter(|&z| {
                    (own.contains(&z) && le(z, x))
                        || shared.iter().any(|&z1| le(z, z1) && le(z1, x))
                })
                .collect()
        };
        let mut r = r_star;
        for &x in &all {
            let (base, own) = if p.contains(x) && dp.contains(&x) {
                (&p.entries[&x], &dp)
            } else {
                (&q.entries[&x], &dq)
            };
            let zs = contributors(x, own);
            let mut s = base.s.clone();
            for n in lg..l {
                let entry = zs.iter().flat_map(|z| k[&(*z, n)].iter().cloned()).collect();
                s.push(entry)
                    .map_err(|e| Error::CertificateFailure(format!("delta_pair_extend: {e}")))?;
            }
            r.insert(x, Atom::new(s, base.w, fsets[&x].clone()));
        }
        Ok(r)
    }
}
