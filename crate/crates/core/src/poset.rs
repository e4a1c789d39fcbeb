//! Finite posets with a designated cofinal subset `R` and the rank function it
//! induces, plus the down-set and stratum machinery used by the forcing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest stratum the clause-9 check will enumerate subsets of.
pub const MAX_STRATUM: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub type ElementSet = BTreeSet<ElementId>;

/// Plain description of a poset: element names, strict-order pairs
/// `(smaller, larger)` and the cofinal subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetSpec {
    pub elements: Vec<String>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
    pub cofinal: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedPoset {
    names: Vec<String>,
    by_name: BTreeMap<String, ElementId>,
    /// `less[x][y]` iff `x < y`, transitively closed.
    less: Vec<Vec<bool>>,
    cofinal: Vec<bool>,
    rank: Vec<usize>,
    top_rank: usize,
}

impl RankedPoset {
    pub fn from_spec(spec: &PosetSpec) -> Result<Self> {
        let order: Vec<(&str, &str)> = spec.order.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let elements: Vec<&str> = spec.elements.iter().map(String::as_str).collect();
        let cofinal: Vec<&str> = spec.cofinal.iter().map(String::as_str).collect();
        RankedPoset::new(&elements, &order, &cofinal)
    }

    pub fn new(elements: &[&str], order: &[(&str, &str)], cofinal: &[&str]) -> Result<Self> {
        let n = elements.len();
        let mut by_name = BTreeMap::new();
        for (i, name) in elements.iter().enumerate() {
            if by_name.insert(name.to_string(), ElementId(i as u32)).is_some() {
                return Err(Error::Validation(format!("duplicate element {name:?}")));
            }
        }
        let lookup = |name: &str| {
            by_name
                .get(name)
                .copied()
                .ok_or_else(|| Error::Validation(format!("unknown element {name:?}")))
        };
        let mut less = vec![vec![false; n]; n];
        for (a, b) in order {
            less[lookup(a)?.index()][lookup(b)?.index()] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if less[i][k] {
                    for j in 0..n {
                        if less[k][j] {
                            less[i][j] = true;
                        }
                    }
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| less[i][i]) {
            return Err(Error::Validation(format!(
                "order has a cycle through {:?}",
                elements[i]
            )));
        }
        let mut in_r = vec![false; n];
        for name in cofinal {
            in_r[lookup(name)?.index()] = true;
        }
        for i in 0..n {
            if !in_r[i] && !(0..n).any(|j| in_r[j] && less[i][j]) {
                return Err(Error::Validation(format!(
                    "cofinal set misses everything above {:?}",
                    elements[i]
                )));
            }
        }
        // rank on R by longest strict chains below, then min over upper bounds
        let mut rank = vec![usize::MAX; n];
        let mut done = 0;
        while done < in_r.iter().filter(|&&r| r).count() {
            for i in 0..n {
                if !in_r[i] || rank[i] != usize::MAX {
                    continue;
                }
                let below: Vec<usize> = (0..n).filter(|&j| in_r[j] && less[j][i]).collect();
                if below.iter().all(|&j| rank[j] != usize::MAX) {
                    rank[i] = below.iter().map(|&j| rank[j] + 1).max().unwrap_or(0);
                    done += 1;
                }
            }
        }
        let top_rank = (0..n).filter(|&i| in_r[i]).map(|i| rank[i] + 1).max().unwrap_or(0);
        for i in 0..n {
            if !in_r[i] {
                rank[i] = (0..n)
                    .filter(|&j| in_r[j] && less[i][j])
                    .map(|j| rank[j])
                    .min()
                    .unwrap_or(top_rank)
                    .min(top_rank);
            }
        }
        Ok(RankedPoset {
            names: elements.iter().map(|s| s.to_string()).collect(),
            by_name,
            less,
            cofinal: in_r,
            rank,
            top_rank,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.len() as u32).map(ElementId)
    }

    pub fn all(&self) -> ElementSet {
        self.ids().collect()
    }

    pub fn name(&self, x: ElementId) -> &str {
        &self.names[x.index()]
    }

    pub fn id(&self, name: &str) -> Result<ElementId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::Input(format!("unknown element {name:?}")))
    }

    pub fn contains(&self, x: ElementId) -> bool {
        x.index() < self.len()
    }

    pub fn in_cofinal(&self, x: ElementId) -> bool {
        self.cofinal[x.index()]
    }

    pub fn spec(&self) -> PosetSpec {
        let mut order = Vec::new();
        for x in self.ids() {
            for y in self.ids() {
                if self.less(x, y) {
                    order.push((self.name(x).to_string(), self.name(y).to_string()));
                }
            }
        }
        PosetSpec {
            elements: self.names.clone(),
            order,
            cofinal: self.ids().filter(|&x| self.in_cofinal(x)).map(|x| self.name(x).to_string()).collect(),
        }
    }

    pub fn less(&self, x: ElementId, y: ElementId) -> bool {
        self.less[x.index()][y.index()]
    }

    pub fn leq(&self, x: ElementId, y: ElementId) -> bool {
        x == y || self.less(x, y)
    }

    pub fn rank(&self, x: ElementId) -> usize {
        self.rank[x.index()]
    }

    /// Rank of the added top element.
    pub fn top_rank(&self) -> usize {
        self.top_rank
    }

    /// `x ≪ y`: `x < y` with strictly smaller rank.
    pub fn ll(&self, x: ElementId, y: ElementId) -> bool {
        self.less(x, y) && self.rank(x) < self.rank(y)
    }

    /// `Q_x = {y : y ≪ x}`.
    pub fn q_of(&self, x: ElementId) -> ElementSet {
        self.ids().filter(|&y| self.ll(y, x)).collect()
    }

    /// `Q_{<ξ}`.
    pub fn below_rank(&self, xi: usize) -> ElementSet {
        self.ids().filter(|&y| self.rank(y) < xi).collect()
    }

    /// `{x : x <= b}`.
    pub fn down_set(&self, b: ElementId) -> ElementSet {
        self.ids().filter(|&x| self.leq(x, b)).collect()
    }

    pub fn stratum(&self, d: &ElementSet, xi: usize) -> ElementSet {
        d.iter().copied().filter(|&y| self.rank(y) == xi).collect()
    }

    /// `D_{<=x}`: elements of `d` of the same rank as `x` lying below it.
    pub fn same_rank_down(&self, d: &ElementSet, x: ElementId) -> ElementSet {
        let xi = self.rank(x);
        d.iter().copied().filter(|&y| self.rank(y) == xi && self.leq(y, x)).collect()
    }

    /// `bar(D)`: the ranks occurring in `d`.
    pub fn ranks(&self, d: &ElementSet) -> BTreeSet<usize> {
        d.iter().map(|&x| self.rank(x)).collect()
    }

    pub fn is_downward_closed_in(&self, e: &ElementSet, d: &ElementSet) -> bool {
        e.is_subset(d) && e.iter().all(|&x| d.iter().all(|&y| !self.less(y, x) || e.contains(&y)))
    }

    pub fn is_downward_closed(&self, e: &ElementSet) -> bool {
        self.is_downward_closed_in(e, &self.all())
    }

    pub fn downward_closure(&self, e: &ElementSet, d: &ElementSet) -> ElementSet {
        d.iter().copied().filter(|&y| e.iter().any(|&x| self.leq(y, x))).collect::<ElementSet>()
            .union(e).copied().collect()
    }

    /// Every subset of `d` that is downward closed in `d`, as bitmasks over
    /// `d` in iteration order.
    pub fn downward_closed_masks(&self, d: &[ElementId]) -> Vec<u32> {
        assert!(d.len() <= MAX_STRATUM + 8, "stratum too large to enumerate");
        // below[i]: mask of elements of d strictly below d[i]
        let below: Vec<u32> = d
            .iter()
            .map(|&x| {
                d.iter()
                    .enumerate()
                    .filter(|(_, &y)| self.less(y, x))
                    .fold(0u32, |m, (j, _)| m | 1 << j)
            })
            .collect();
        (0u32..1 << d.len())
            .filter(|&mask| (0..d.len()).all(|i| mask >> i & 1 == 0 || below[i] & !mask == 0))
            .collect()
    }

    /// Every downward-closed subset of `Q`.
    pub fn downward_closed_sets(&self) -> Vec<ElementSet> {
        let ids: Vec<ElementId> = self.ids().collect();
        self.downward_closed_masks(&ids)
            .into_iter()
            .map(|m| ids.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &x)| x).collect())
            .collect()
    }

    pub fn max_stratum_len(&self) -> usize {
        (0..=self.top_rank)
            .map(|xi| self.ids().filter(|&x| self.rank(x) == xi).count())
            .max()
            .unwrap_or(0)
    }

    /// Ordered pairs `(a, b)` with `a ≰ b`.
    pub fn non_leq_pairs(&self) -> Vec<(ElementId, ElementId)> {
        let mut out = Vec::new();
        for a in self.ids() {
            for b in self.ids() {
                if !self.leq(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn names_of(&self, d: &ElementSet) -> Vec<&str> {
        d.iter().map(|&x| self.name(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(p: &RankedPoset, names: &[&str]) -> ElementSet {
        names.iter().map(|n| p.id(n).unwrap()).collect()
    }

    #[test]
    fn chain_ranks() {
        let p = RankedPoset::new(&["a", "b"], &[("a", "b")], &["a", "b"]).unwrap();
        let (a, b) = (p.id("a").unwrap(), p.id("b").unwrap());
        assert_eq!((p.rank(a), p.rank(b), p.top_rank()), (0, 1, 2));
        assert!(p.ll(a, b));
        assert_eq!(p.q_of(b), set(&p, &["a"]));
        assert!(p.q_of(a).is_empty());
    }

    #[test]
    fn antichain_ranks() {
        let p = RankedPoset::new(&["a", "b"], &[], &["a", "b"]).unwrap();
        let (a, b) = (p.id("a").unwrap(), p.id("b").unwrap());
        assert_eq!((p.rank(a), p.rank(b)), (0, 0));
        assert!(!p.ll(a, b));
        assert!(p.q_of(a).is_empty() && p.q_of(b).is_empty());
    }

    #[test]
    fn element_below_a_single_cofinal_point_takes_its_rank() {
        let p = RankedPoset::new(
            &["0", "1", "2", "e"],
            &[("0", "1"), ("1", "2"), ("e", "2")],
            &["0", "1", "2"],
        )
        .unwrap();
        let e = p.id("e").unwrap();
        assert_eq!(p.rank(e), 2);
        assert_eq!(p.rank(p.id("2").unwrap()), 2);
        assert!(p.is_downward_closed(&set(&p, &["e"])));
        // same rank and below, so not ≪
        assert!(!p.ll(e, p.id("2").unwrap()));
    }

    #[test]
    fn rejects_invalid_posets() {
        assert!(RankedPoset::new(&["a", "b"], &[("a", "b"), ("b", "a")], &["a", "b"]).is_err());
        assert!(RankedPoset::new(&["a", "b"], &[("a", "b")], &["a"]).is_err());
        assert!(RankedPoset::new(&["a", "a"], &[], &["a"]).is_err());
        assert!(RankedPoset::new(&["a"], &[("a", "z")], &["a"]).is_err());
    }

    #[test]
    fn two_chains_with_partial_cofinal_set() {
        let p = RankedPoset::new(
            &["a0", "a1", "b0", "b1"],
            &[("a0", "a1"), ("b0", "b1")],
            &["a0", "a1", "b1"],
        )
        .unwrap();
        let r = |n: &str| p.rank(p.id(n).unwrap());
        assert_eq!((r("a0"), r("a1"), r("b0"), r("b1")), (0, 1, 0, 0));
        let d = p.all();
        assert_eq!(p.same_rank_down(&d, p.id("b1").unwrap()), set(&p, &["b0", "b1"]));
        assert_eq!(p.ranks(&d), [0, 1].into());
        assert_eq!(p.non_leq_pairs().len(), 10);
    }

    #[test]
    fn downward_closure_is_least_and_idempotent() {
        let p = RankedPoset::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &["c"]).unwrap();
        let all = p.all();
        let e = set(&p, &["b"]);
        let cl = p.downward_closure(&e, &all);
        assert_eq!(cl, set(&p, &["a", "b"]));
        assert_eq!(p.downward_closure(&cl, &all), cl);
        assert!(p.is_downward_closed_in(&cl, &all));
        assert!(!p.is_downward_closed_in(&e, &all));
        // ranks: c in R has rank 0; a, b take the rank of c
        assert!(p.ids().all(|x| p.rank(x) == 0));
        assert_eq!(p.downward_closed_sets().len(), 4);
    }
}
