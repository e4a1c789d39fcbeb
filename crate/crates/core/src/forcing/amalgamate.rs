//! Common extensions of a condition and an extension of its restriction to a
//! downward-closed set.

use std::collections::{BTreeMap, BTreeSet};

use crate::cantor::ClopenIndex;
use crate::error::{precondition, Error, Result};
use crate::names::NameRef;
use crate::poset::{ElementId, ElementSet};

use super::{Atom, Forcing, NQCondition};

impl Forcing<'_> {
    /// `q` with `q <= p` and `q <= r`, for `r` over the downward-closed `a`
    /// extending `p↾a`. Built rank by rank from the top rank of `r` down.
    pub fn amalgamate(&self, p: &NQCondition, r: &NQCondition, a: &ElementSet) -> Result<NQCondition> {
        precondition!(self.poset.is_downward_closed(a), "amalgamation set is not downward closed");
        precondition!(r.domain().is_subset(a), "second condition leaves the amalgamation set");
        if let Some(v) = self.leq_failure(r, &p.restrict_to(a))? {
            return Err(Error::PreconditionViolated(format!(
                "second condition does not extend the restriction: {v}"
            )));
        }
        let q = self.amalgamate_below(p, r, a)?;
        if self.self_check {
            self.check_condition(&q, "amalgamate")?;
            self.check_leq(&q, p, "amalgamate")?;
            self.check_leq(&q, r, "amalgamate")?;
        }
        Ok(q)
    }

    fn amalgamate_below(&self, p: &NQCondition, r: &NQCondition, a: &ElementSet) -> Result<NQCondition> {
        let Some(&gamma) = self.ranks(r).iter().next_back() else {
            return Ok(p.clone());
        };
        let a_below: ElementSet = a.iter().copied().filter(|&x| self.rank(x) < gamma).collect();
        let q_lt = self.amalgamate_below(
            &self.restrict_below(p, gamma),
            &self.restrict_below(r, gamma),
            &a_below,
        )?;

        let dr = self.stratum(r, gamma);
        let dp = self.stratum(p, gamma);
        let lr = r.entries[&dr[0]].s.len();
        let lp = dp.first().map(|x| p.entries[x].s.len());
        let gamma_in_pa = dp.iter().any(|x| a.contains(x));
        let mut atoms: BTreeMap<ElementId, &Atom> = BTreeMap::new();
        for &x in &dp {
            atoms.insert(x, &p.entries[&x]);
        }
        for &x in &dr {
            atoms.insert(x, &r.entries[&x]);
        }
        // When rank gamma of p lies outside `a`, its length may exceed l^r.
        let l_hi = lr.max(lp.unwrap_or(0));
        let l = atoms.values().map(|at| at.w).sum::<usize>() + l_hi;
        let names: BTreeSet<NameRef> = atoms.values().flat_map(|at| at.f.iter().cloned()).collect();
        let q_star = self.decide_names(&q_lt, &names, l, None)?;

        let mut k: BTreeMap<(ElementId, usize), BTreeSet<ClopenIndex>> = BTreeMap::new();
        for (&z, at) in &atoms {
            for n in at.s.len()..l {
                k.insert((z, n), self.k_set(&q_star, z, &at.f, n)?);
            }
        }
        let union_k = |zs: &mut dyn Iterator<Item = ElementId>, n: usize| -> BTreeSet<ClopenIndex> {
            zs.flat_map(|z| k[&(z, n)].iter().cloned()).collect()
        };
        let below_in = |x: ElementId, set: &[ElementId]| -> Vec<ElementId> {
            set.iter().copied().filter(|&z| self.poset.leq(z, x)).collect()
        };
        let all: Vec<ElementId> = atoms.keys().copied().collect();

        let mut q = q_star.clone();
        for (&x, at) in &atoms {
            let mut s = at.s.clone();
            if dr.contains(&x) {
                let zs = below_in(x, &dr);
                for n in lr..l {
                    s.push(union_k(&mut zs.iter().copied(), n)).map_err(cert)?;
                }
            } else {
                let lp = lp.unwrap();
                let dp_le_x = below_in(x, &dp);
                for n in lp..l {
                    let entry = if n < lr {
                        let mut e: BTreeSet<ClopenIndex> = dp_le_x
                            .iter()
                            .filter(|z| dr.contains(z))
                            .flat_map(|z| r.entries[z].s.entry(n).unwrap().iter().cloned())
                            .collect();
                        e.extend(union_k(&mut dp_le_x.iter().copied().filter(|z| !dr.contains(z)), n));
                        e
                    } else if gamma_in_pa {
                        union_k(&mut below_in(x, &all).into_iter(), n)
                    } else {
                        union_k(&mut dp_le_x.iter().copied(), n)
                    };
                    s.push(entry).map_err(cert)?;
                }
            }
            q.insert(x, Atom::new(s, at.w, at.f.clone()));
        }
        Ok(q.merged(&p.filter(|x| self.rank(x) > gamma)))
    }
}

fn cert(e: Error) -> Error {
    Error::CertificateFailure(format!("amalgamate: {e}"))
}
