//! Decidable names for functions `omega -> omega`: check-names of ground
//! functions and the rank-trace name of a coordinate's generic slalom.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::cantor::{CantorIndex, ClopenIndex};
use crate::error::Result;
use crate::ground::GroundFunction;
use crate::poset::{ElementId, ElementSet, RankedPoset};
use crate::slalom::{extend_trace, r_phi, PartialSlalom, RankTrace};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameRef {
    /// The canonical name of a ground function.
    Check(GroundFunction),
    /// The name for `r_{φ_a}`, the rank trace of the slalom added at `a`.
    RSlalom(ElementId),
}

impl NameRef {
    /// `∅` for check-names, `{a} ∪ Q_a` for rank-trace names.
    pub fn support(&self, poset: &RankedPoset) -> ElementSet {
        match self {
            NameRef::Check(_) => ElementSet::new(),
            NameRef::RSlalom(a) => {
                let mut s = poset.q_of(*a);
                s.insert(*a);
                s
            }
        }
    }

    pub fn display<'a>(&'a self, poset: &'a RankedPoset) -> impl fmt::Display + 'a {
        struct D<'a>(&'a NameRef, &'a RankedPoset);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self.0 {
                    NameRef::Check(g) => write!(f, "check({g})"),
                    NameRef::RSlalom(a) => write!(f, "r[{}]", self.1.name(*a)),
                }
            }
        }
        D(self, poset)
    }
}

/// Evaluates rank traces with memoization keyed by slalom. A trace of a
/// longer slalom is built on the longest cached prefix.
#[derive(Debug)]
pub struct TraceCache<'a> {
    index: &'a CantorIndex,
    traces: RefCell<HashMap<PartialSlalom, Rc<RankTrace>>>,
}

impl<'a> TraceCache<'a> {
    pub fn new(index: &'a CantorIndex) -> Self {
        TraceCache {
            index,
            traces: RefCell::new(HashMap::new()),
        }
    }

    pub fn index(&self) -> &'a CantorIndex {
        self.index
    }

    pub fn trace(&self, s: &PartialSlalom) -> Result<Rc<RankTrace>> {
        if let Some(t) = self.traces.borrow().get(s) {
            return Ok(Rc::clone(t));
        }
        let cached = {
            let traces = self.traces.borrow();
            (1..s.len()).rev().find_map(|l| traces.get(&s.prefix(l)).cloned())
        };
        let trace = match cached {
            Some(t) => Rc::new(extend_trace((*t).clone(), s, self.index)?),
            None => Rc::new(r_phi(s, self.index)?),
        };
        self.traces.borrow_mut().insert(s.clone(), Rc::clone(&trace));
        Ok(trace)
    }

    /// `r_φ(n)` for the slalom `s`, when `len(s) >= n + 1`.
    pub fn r_value(&self, s: &PartialSlalom, n: usize) -> Result<Option<ClopenIndex>> {
        if s.len() <= n {
            return Ok(None);
        }
        Ok(Some(self.trace(s)?.values[n].clone()))
    }
}

/// `Some(value)` when a condition whose coordinate slaloms are given by
/// `slalom_of` decides the value of `name` at `n`.
pub fn decide_with<'s>(
    name: &NameRef,
    n: usize,
    slalom_of: impl Fn(ElementId) -> Option<&'s PartialSlalom>,
    cache: &TraceCache,
) -> Result<Option<ClopenIndex>> {
    match name {
        NameRef::Check(g) => Ok(Some(g.eval(n))),
        NameRef::RSlalom(a) => match slalom_of(*a) {
            Some(s) => cache.r_value(s, n),
            None => Ok(None),
        },
    }
}
