//! Localization posets: the plain variant `(s, F)` and the weighted variant
//! `(s, w, F)` whose weight bounds the growth of future slalom entries.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cantor::ClopenIndex;
use crate::error::{precondition, Error, Result};
use crate::ground::GroundFunction;
use crate::slalom::PartialSlalom;

fn image(fs: &BTreeSet<GroundFunction>, n: usize) -> BTreeSet<ClopenIndex> {
    fs.iter().map(|f| f.eval(n)).collect()
}

fn new_stages_cover(p: &PartialSlalom, q_len: usize, fs: &BTreeSet<GroundFunction>) -> bool {
    (q_len..p.len()).all(|n| {
        let entry = p.entry(n).expect("n < len");
        fs.iter().all(|f| entry.contains(&f.eval(n)))
    })
}

/// A condition `(s, w, F)` with `|F| <= w <= len(s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocStarCondition {
    pub s: PartialSlalom,
    pub w: usize,
    pub f: BTreeSet<GroundFunction>,
}

impl LocStarCondition {
    pub fn new(s: PartialSlalom, w: usize, f: BTreeSet<GroundFunction>) -> Result<Self> {
        if f.len() > w || w > s.len() {
            return Err(Error::Validation(format!(
                "need |F| <= w <= len(s), got |F|={}, w={w}, len(s)={}",
                f.len(),
                s.len()
            )));
        }
        Ok(LocStarCondition { s, w, f })
    }

    /// `(⟨∅⟩, 0, ∅)`.
    pub fn trivial() -> Self {
        LocStarCondition {
            s: PartialSlalom::blank(1),
            w: 0,
            f: BTreeSet::new(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.f.len() <= self.w && self.w <= self.s.len()
    }
}

/// `p <= q`: `p` extends `q`.
pub fn loc_star_leq(p: &LocStarCondition, q: &LocStarCondition) -> bool {
    let (lp, lq) = (p.s.len(), q.s.len());
    q.s.is_prefix_of(&p.s)
        && q.w <= p.w
        && q.f.is_subset(&p.f)
        && new_stages_cover(&p.s, lq, &q.f)
        && p.w <= q.w + (lp - lq)
        && (lq..lp).all(|n| p.s.entry(n).unwrap().len() <= q.w + (n - lq))
}

/// Extends `s` to length at least `n` by appending `F`-images.
pub fn loc_star_prolong(p: &LocStarCondition, n: usize) -> LocStarCondition {
    let mut q = p.clone();
    while q.s.len() < n {
        let m = q.s.len();
        q.s.push(image(&q.f, m)).expect("|F| <= w <= len(s)");
    }
    q
}

/// One new stage holding the `F`-image, weight plus one, `f` added.
pub fn loc_star_add_function(p: &LocStarCondition, f: &GroundFunction) -> LocStarCondition {
    let mut q = loc_star_prolong(p, p.s.len() + 1);
    q.w += 1;
    q.f.insert(f.clone());
    q
}

/// The linkedness class `(s, w)` of a condition with `w >= 2|F|`.
pub fn loc_star_linked_key(p: &LocStarCondition) -> Option<(PartialSlalom, usize)> {
    (p.w >= 2 * p.f.len()).then(|| (p.s.clone(), p.w))
}

/// Common extension of two conditions with the same linked key.
pub fn loc_star_link(p: &LocStarCondition, q: &LocStarCondition) -> Result<LocStarCondition> {
    let kp = loc_star_linked_key(p);
    precondition!(kp.is_some(), "first condition has w < 2|F|");
    precondition!(kp == loc_star_linked_key(q), "linked keys differ");
    LocStarCondition::new(p.s.clone(), p.w, p.f.union(&q.f).cloned().collect())
}

/// A condition `(s, F)` with `|F| <= len(s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocCondition {
    pub s: PartialSlalom,
    pub f: BTreeSet<GroundFunction>,
}

impl LocCondition {
    pub fn new(s: PartialSlalom, f: BTreeSet<GroundFunction>) -> Result<Self> {
        if f.len() > s.len() {
            return Err(Error::Validation(format!(
                "need |F| <= len(s), got |F|={}, len(s)={}",
                f.len(),
                s.len()
            )));
        }
        Ok(LocCondition { s, f })
    }

    pub fn trivial() -> Self {
        LocCondition {
            s: PartialSlalom::blank(1),
            f: BTreeSet::new(),
        }
    }
}

pub fn loc_leq(p: &LocCondition, q: &LocCondition) -> bool {
    q.s.is_prefix_of(&p.s) && q.f.is_subset(&p.f) && new_stages_cover(&p.s, q.s.len(), &q.f)
}

pub fn loc_prolong(p: &LocCondition, n: usize) -> LocCondition {
    let mut q = p.clone();
    while q.s.len() < n {
        let m = q.s.len();
        q.s.push(image(&q.f, m)).expect("|F| <= len(s)");
    }
    q
}

pub fn loc_add_function(p: &LocCondition, f: &GroundFunction) -> LocCondition {
    let mut q = loc_prolong(p, p.s.len() + 1);
    q.f.insert(f.clone());
    q
}

/// Conditions with `2|F| <= len(s)` and equal `s` are compatible.
pub fn loc_linked_key(p: &LocCondition) -> Option<PartialSlalom> {
    (2 * p.f.len() <= p.s.len()).then(|| p.s.clone())
}

pub fn loc_link(p: &LocCondition, q: &LocCondition) -> Result<LocCondition> {
    let kp = loc_linked_key(p);
    precondition!(kp.is_some(), "first condition has 2|F| > len(s)");
    precondition!(kp == loc_linked_key(q), "linked keys differ");
    LocCondition::new(p.s.clone(), p.f.union(&q.f).cloned().collect())
}

/// A descending chain of weighted conditions that registers each function at
/// its requested stage and otherwise prolongs one stage at a time.
#[derive(Clone, Debug)]
pub struct LocRun {
    pub chain: Vec<LocStarCondition>,
    /// `(function, n)`: the function is localized from stage `n` on.
    pub thresholds: Vec<(GroundFunction, usize)>,
}

impl LocRun {
    pub fn slalom(&self) -> &PartialSlalom {
        &self.chain.last().expect("chain is never empty").s
    }

    /// Every link extends its predecessor and every registered function lies
    /// in the slalom from its threshold to the end.
    pub fn verify(&self) -> bool {
        let phi = self.slalom();
        self.chain.iter().all(LocStarCondition::is_valid)
            && self.chain.windows(2).all(|w| loc_star_leq(&w[1], &w[0]))
            && self.thresholds.iter().all(|(f, t)| {
                (*t..phi.len()).all(|n| phi.entry(n).unwrap().contains(&f.eval(n)))
            })
    }
}

/// Runs to slalom length `depth`; `register` lists `(stage, function)` pairs.
pub fn loc_generic_run(register: &[(usize, GroundFunction)], depth: usize) -> LocRun {
    let mut chain = vec![LocStarCondition::trivial()];
    let mut thresholds = Vec::new();
    let mut pending: Vec<&(usize, GroundFunction)> = register.iter().collect();
    pending.sort_by_key(|(t, _)| *t);
    let mut pending = pending.into_iter().peekable();
    loop {
        let cur = chain.last().unwrap();
        let next = match pending.peek() {
            Some((t, f)) if *t <= cur.s.len() => {
                let q = loc_star_add_function(cur, f);
                thresholds.push((f.clone(), q.s.len()));
                pending.next();
                q
            }
            _ if cur.s.len() < depth => loc_star_prolong(cur, cur.s.len() + 1),
            _ => break,
        };
        chain.push(next);
    }
    LocRun { chain, thresholds }
}
