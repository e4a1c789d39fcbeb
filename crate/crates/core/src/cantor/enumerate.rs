//! The canonical enumeration `C^n_0, C^n_1, ...` of all clopen sets of
//! measure `2^(-h(n))`.
//!
//! Order: by minimal support depth `d = h(n), h(n)+1, ...`; within one depth
//! by the lexicographic order of the sorted list of depth-`d` addresses. A set
//! of measure `2^(-h)` at depth `d` is a `k`-subset of the `2^d` addresses with
//! `k = 2^(d-h)`; it has minimal depth `d` unless it is a union of sibling
//! pairs ("reducible"). Ranking and unranking are done combinatorially with
//! hockey-stick sums, so indices never require listing earlier sets.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::clopen::{Address, ClopenSet};
use super::scale::ScaleFunction;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Index into the stage-`n` enumeration.
pub type ClopenIndex = BigUint;

/// Extra depth beyond `h(n)` that index resolution may explore by default.
pub const DEFAULT_DEPTH_SLACK: u32 = 10;

/// `C(n, r)` for a big `n` and small `r`.
pub(crate) fn binom(n: &BigUint, r: u64) -> BigUint {
    if BigUint::from(r) > *n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// One depth level of the enumeration: `k`-subsets of `2^depth` addresses.
struct Level {
    n_addr: BigUint,
    n_pairs: BigUint,
    k: u64,
}

impl Level {
    fn new(h: u64, depth: u64) -> Result<Level> {
        let spread = depth - h;
        if spread >= 63 {
            return Err(Error::DepthExhausted(format!(
                "level depth {depth} too far beyond h = {h}"
            )));
        }
        let n_addr = BigUint::one() << depth as usize;
        let n_pairs = if depth == 0 {
            BigUint::zero()
        } else {
            BigUint::one() << (depth - 1) as usize
        };
        Ok(Level {
            n_addr,
            n_pairs,
            k: 1u64 << spread,
        })
    }

    fn reducible_possible(&self) -> bool {
        self.k % 2 == 0
    }

    /// Number of sets with minimal depth exactly this level.
    fn count(&self) -> BigUint {
        let all = binom(&self.n_addr, self.k);
        if self.reducible_possible() {
            all - binom(&self.n_pairs, self.k / 2)
        } else {
            all
        }
    }

    /// Whether `prefix` could still extend to a union of sibling pairs.
    fn pair_consistent(prefix: &[BigUint]) -> bool {
        let j = prefix.len();
        for t in 0..j / 2 {
            let a = &prefix[2 * t];
            if a.bit(0) || prefix[2 * t + 1] != a + 1u32 {
                return false;
            }
        }
        j % 2 == 0 || !prefix[j - 1].bit(0)
    }

    /// `sum_{lo <= v < hi} irr(prefix + v)` where `irr` counts irreducible
    /// completions to a full `k`-subset.
    fn irreducible_sum(&self, prefix: &[BigUint], lo: &BigUint, hi: &BigUint) -> BigUint {
        if lo >= hi {
            return BigUint::zero();
        }
        let j = prefix.len() as u64;
        let r = self.k - j - 1;
        // sum_{v} C(N - 1 - v, r) = C(N - lo, r + 1) - C(N - hi, r + 1)
        let all = binom(&(&self.n_addr - lo), r + 1) - binom(&(&self.n_addr - hi), r + 1);
        if !self.reducible_possible() || !Level::pair_consistent(prefix) {
            return all;
        }
        let red = if j % 2 == 0 {
            // v opens a new pair: v even, then (k - j - 2) / 2 more pairs above v/2.
            let s = (self.k - j - 2) / 2;
            let u_lo: BigUint = (lo + 1u32) >> 1;
            let u_hi: BigUint = (hi + 1u32) >> 1;
            if u_lo >= u_hi {
                BigUint::zero()
            } else {
                binom(&(&self.n_pairs - &u_lo), s + 1) - binom(&(&self.n_pairs - &u_hi), s + 1)
            }
        } else {
            // v must close the pair opened by the last prefix element.
            let e = &prefix[prefix.len() - 1];
            let v = e + 1u32;
            if lo <= &v && &v < hi {
                let pair: BigUint = e >> 1;
                binom(&(&self.n_pairs - pair - 1u32), (self.k - j - 1) / 2)
            } else {
                BigUint::zero()
            }
        };
        all - red
    }

    fn rank(&self, combo: &[BigUint]) -> BigUint {
        let mut rank = BigUint::zero();
        for j in 0..combo.len() {
            let lo = if j == 0 {
                BigUint::zero()
            } else {
                &combo[j - 1] + 1u32
            };
            rank += self.irreducible_sum(&combo[..j], &lo, &combo[j]);
        }
        rank
    }

    fn unrank(&self, mut i: BigUint) -> Vec<BigUint> {
        let mut combo: Vec<BigUint> = Vec::with_capacity(self.k as usize);
        for j in 0..self.k {
            let lo = combo.last().map(|v| v + 1u32).unwrap_or_default();
            // candidates v < n_addr - (k - j - 1)
            let hi_max = &self.n_addr - (self.k - j - 1);
            // largest v in [lo, hi_max) with S(lo, v) <= i
            let (mut a, mut b) = (lo.clone(), &hi_max - 1u32);
            while a < b {
                let mid: BigUint = (&a + &b + 1u32) >> 1;
                if self.irreducible_sum(&combo, &lo, &mid) <= i {
                    a = mid;
                } else {
                    b = mid - 1u32;
                }
            }
            i -= self.irreducible_sum(&combo, &lo, &a);
            combo.push(a);
        }
        combo
    }
}

/// Resolves clopen indices for every stage of a scale.
#[derive(Clone, Debug)]
pub struct CantorIndex {
    scale: ScaleFunction,
    depth_slack: u32,
}

impl CantorIndex {
    pub fn new(scale: ScaleFunction) -> Self {
        CantorIndex {
            scale,
            depth_slack: DEFAULT_DEPTH_SLACK,
        }
    }

    pub fn with_depth_slack(mut self, slack: u32) -> Self {
        self.depth_slack = slack;
        self
    }

    pub fn scale(&self) -> &ScaleFunction {
        &self.scale
    }

    pub fn depth_slack(&self) -> u32 {
        self.depth_slack
    }

    /// Measure `2^(-h(n))` of every stage-`n` set.
    pub fn stage_measure(&self, n: usize) -> Result<Dyadic> {
        Ok(Dyadic::pow2_inv(self.scale.get(n)?))
    }

    fn max_depth(&self, h: u64, cap: Option<u32>) -> u64 {
        h + cap.unwrap_or(self.depth_slack) as u64
    }

    /// `C^n_i`.
    pub fn set_at(&self, n: usize, index: &ClopenIndex) -> Result<ClopenSet> {
        self.set_at_capped(n, index, None)
    }

    fn set_at_capped(&self, n: usize, index: &ClopenIndex, cap: Option<u32>) -> Result<ClopenSet> {
        let h = self.scale.get(n)?;
        if index.bits() <= h {
            // the first 2^h indices are the depth-h cylinders
            return Ok(ClopenSet::cylinder(&Address::from_value(h as u32, index)?));
        }
        let mut i = index.clone();
        let max_depth = self.max_depth(h, cap);
        for depth in h..=max_depth {
            let level = Level::new(h, depth)?;
            let count = level.count();
            if i < count {
                let combo = level.unrank(i);
                let addrs = combo
                    .iter()
                    .map(|v| Address::from_value(depth as u32, v))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(ClopenSet::from_addresses(&addrs));
            }
            i -= count;
        }
        Err(Error::DepthExhausted(format!(
            "index {index} at stage {n} not reached by depth {max_depth}"
        )))
    }

    /// Position of `set` in the stage-`n` enumeration (the inverse of [`Self::set_at`]).
    pub fn index_of(&self, n: usize, set: &ClopenSet) -> Result<ClopenIndex> {
        let h = self.scale.get(n)?;
        if set.measure() != Dyadic::pow2_inv(h) {
            return Err(Error::PreconditionViolated(format!(
                "set {set} has measure {}, stage {n} needs 2^-{h}",
                set.measure()
            )));
        }
        let depth = set.depth() as u64;
        if depth > self.max_depth(h, None) {
            return Err(Error::DepthExhausted(format!(
                "set depth {depth} beyond cap for stage {n}"
            )));
        }
        let combo: Vec<BigUint> = set
            .addresses_at(depth as u32)
            .iter()
            .map(Address::value)
            .collect();
        self.index_from_combo(h, depth, &combo)
    }

    fn index_from_combo(&self, h: u64, depth: u64, combo: &[BigUint]) -> Result<ClopenIndex> {
        let mut offset = BigUint::zero();
        for d in h..depth {
            offset += Level::new(h, d)?.count();
        }
        Ok(offset + Level::new(h, depth)?.rank(combo))
    }

    /// The first `count` sets of the stage-`n` enumeration, searching no deeper
    /// than `h(n) + depth_cap` (the configured slack when `None`).
    pub fn enumerate_clopen(
        &self,
        n: usize,
        count: usize,
        depth_cap: Option<u32>,
    ) -> Result<Vec<ClopenSet>> {
        (0..count)
            .map(|i| self.set_at_capped(n, &BigUint::from(i), depth_cap))
            .collect()
    }

    /// The least `i` with `C^n_i` inside `container`.
    pub fn min_index_inside(&self, n: usize, container: &ClopenSet) -> Result<ClopenIndex> {
        let h = self.scale.get(n)?;
        if container.measure() < Dyadic::pow2_inv(h) {
            return Err(Error::PreconditionViolated(format!(
                "container {container} has measure {} < 2^-{h}",
                container.measure()
            )));
        }
        let bound = (container.depth() as u64).max(h);
        for depth in h..=bound {
            let k = 1u64
                .checked_shl((depth - h) as u32)
                .filter(|_| depth - h < 63)
                .ok_or_else(|| Error::DepthExhausted("container too deep".into()))?;
            if container.count_addresses_at(depth as u32) < BigUint::from(k) {
                continue;
            }
            if depth == h {
                let a = container
                    .leftmost_address_at(depth as u32)
                    .expect("count checked above");
                return Ok(a.value());
            }
            // No set fits at a shallower depth, so no k/2 sibling pairs lie
            // inside the container and the k smallest addresses are irreducible.
            let combo: Vec<BigUint> = container
                .first_addresses_at(depth as u32, k as usize)
                .iter()
                .map(Address::value)
                .collect();
            return self.index_from_combo(h, depth, &combo);
        }
        Err(Error::CertificateFailure(format!(
            "no stage-{n} set inside {container} up to depth {bound}"
        )))
    }

    /// Stage-`n` index as a small integer, when it fits.
    pub fn small(index: &ClopenIndex) -> Option<u64> {
        index.to_u64()
    }
}
