//! Extensions that put the rank trace of one coordinate into the slalom of an
//! incomparable one at a chosen stage.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cantor::ClopenIndex;
use crate::error::{certify, precondition, Error, Result};
use crate::names::NameRef;
use crate::poset::{ElementId, ElementSet};

use super::{Atom, Forcing, NQCondition};

/// `q <= p` with `k = r_b(m)` decided by `q` and `k ∈ s^q_a(m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip)]
    pub q: NQCondition,
    pub m: usize,
    #[serde(with = "crate::jsonint")]
    pub k: ClopenIndex,
}

impl Forcing<'_> {
    /// For `a ≰ b` and a stage `m_min`, an extension `q` of `p` and a stage
    /// `m > m_min` with `r_b(m) ∈ s^q_a(m)`.
    pub fn incompatibility_witness(
        &self,
        p: &NQCondition,
        a: ElementId,
        b: ElementId,
        m_min: usize,
    ) -> Result<Witness> {
        let poset = self.poset;
        precondition!(poset.contains(a) && poset.contains(b), "unknown element");
        precondition!(
            !poset.leq(a, b),
            "{} <= {}: no witness exists",
            poset.name(a),
            poset.name(b)
        );
        let alpha = self.rank(a);
        let beta = self.rank(b);
        let b_set: ElementSet = poset.down_set(b);

        let mut p1 = self.join(p, a)?;
        p1 = self.join(&p1, b)?;
        let b_alpha: Vec<ElementId> = b_set.iter().copied().filter(|&x| self.rank(x) == alpha).collect();
        if !b_alpha.is_empty() && !b_alpha.iter().any(|&x| p1.contains(x)) {
            p1 = self.join(&p1, b_alpha[0])?;
        }
        let at_a = &p1.entries[&a];
        if at_a.w < at_a.f.len() + 1 {
            p1 = self.bump_weight(&p1, a)?;
        }

        let l_alpha = self.length_at(&p1, alpha).unwrap();
        let m = m_min.max(l_alpha) + 1;
        let p_star = self.prolong(&p1.restrict_to(&b_set), beta, m + 1)?;
        let k = self
            .traces
            .r_value(p_star.slalom(b).unwrap(), m)?
            .ok_or_else(|| Error::CertificateFailure("r_b(m) undecided after prolonging".into()))?;

        let ds = self.stratum(&p_star, alpha);
        let dp = self.stratum(&p1, alpha);
        let ls = ds.first().map(|x| p_star.entries[x].s.len());
        // l^{p*}_α when rank α meets B, else l^p_α
        let l_top = ls.unwrap_or(l_alpha);
        let mut atoms: BTreeMap<ElementId, &Atom> = BTreeMap::new();
        for &x in &dp {
            atoms.insert(x, &p1.entries[&x]);
        }
        for &x in &ds {
            atoms.insert(x, &p_star.entries[&x]);
        }
        // Σ w + l_top bounds every rank-α constraint; m + 1 makes stage m exist.
        let l = (atoms.values().map(|at| at.w).sum::<usize>() + l_top).max(m + 1);

        let b_below: ElementSet = b_set.iter().copied().filter(|&x| self.rank(x) < alpha).collect();
        let amal = self.amalgamate(
            &self.restrict_below(&p1, alpha),
            &self.restrict_below(&p_star, alpha),
            &b_below,
        )?;
        let names: BTreeSet<NameRef> = atoms.values().flat_map(|at| at.f.iter().cloned()).collect();
        let q0 = self.decide_names(&amal, &names, l, None)?;

        let mut k_sets: BTreeMap<(ElementId, usize), BTreeSet<ClopenIndex>> = BTreeMap::new();
        for (&z, at) in &atoms {
            for n in at.s.len()..l {
                let mut set = self.k_set(&q0, z, &at.f, n)?;
                if (z, n) == (a, m) {
                    set.insert(k.clone());
                }
                k_sets.insert((z, n), set);
            }
        }
        certify!(k_sets.contains_key(&(a, m)), "stage m is not new at a");
        let union_k = |zs: &mut dyn Iterator<Item = ElementId>, n: usize| -> BTreeSet<ClopenIndex> {
            zs.flat_map(|z| k_sets[&(z, n)].iter().cloned()).collect()
        };
        let below_in = |x: ElementId, set: &[ElementId]| -> Vec<ElementId> {
            set.iter().copied().filter(|&z| poset.leq(z, x)).collect()
        };
        let all: Vec<ElementId> = atoms.keys().copied().collect();

        let mut q1 = q0.clone();
        for (&x, at) in &atoms {
            let mut s = at.s.clone();
            if ds.contains(&x) {
                let zs = below_in(x, &ds);
                for n in s.len()..l {
                    s.push(union_k(&mut zs.iter().copied(), n)).map_err(cert)?;
                }
            } else {
                let dp_le_x = below_in(x, &dp);
                for n in l_alpha..l {
                    let entry = if n < l_top {
                        let mut e: BTreeSet<ClopenIndex> = dp_le_x
                            .iter()
                            .filter(|z| ds.contains(z))
                            .flat_map(|z| p_star.entries[z].s.entry(n).unwrap().iter().cloned())
                            .collect();
                        e.extend(union_k(&mut dp_le_x.iter().copied().filter(|z| !ds.contains(z)), n));
                        e
                    } else {
                        union_k(&mut below_in(x, &all).into_iter(), n)
                    };
                    s.push(entry).map_err(cert)?;
                }
            }
            q1.insert(x, Atom::new(s, at.w, at.f.clone()));
        }
        let q1 = q1.merged(&p_star.filter(|x| self.rank(x) > alpha));

        let a2: ElementSet = b_set.union(&poset.below_rank(alpha + 1)).copied().collect();
        if self.self_check {
            self.check_condition(&q1, "incompatibility_witness")?;
            self.check_leq(&q1, &p_star, "incompatibility_witness")?;
            self.check_leq(&q1, &p1.restrict_to(&a2), "incompatibility_witness")?;
        }
        let q = self.amalgamate(&p1, &q1, &a2)?;

        let decided = self.decide(&NameRef::RSlalom(b), &q, m)?;
        certify!(decided.as_ref() == Some(&k), "r_b(m) changed under the extension");
        certify!(
            q.slalom(a).and_then(|s| s.entry(m)).is_some_and(|e| e.contains(&k)),
            "k is missing from s_a(m)"
        );
        if self.self_check {
            self.check_leq(&q, p, "incompatibility_witness")?;
        }
        Ok(Witness { q, m, k })
    }
}

fn cert(e: Error) -> Error {
    Error::CertificateFailure(format!("incompatibility_witness: {e}"))
}
