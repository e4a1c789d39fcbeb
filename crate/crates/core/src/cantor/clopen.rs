//! Finite-support clopen subsets of the Cantor space.
//!
//! A clopen set is stored as a binary trie over finite binary addresses. A
//! `Full` node at depth `t` is the cylinder of its path; `Split` nodes never
//! have two `Empty` or two `Full` children, so every set has exactly one
//! representation and the trie height is its minimal support depth.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A finite binary string naming the cylinder of all sequences extending it.
/// Addresses of equal length compare lexicographically, which coincides with
/// the numeric order of [`Address::value`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    bits: Vec<bool>,
}

impl Address {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Address { bits }
    }

    /// The address of length `depth` whose bits spell `value` in binary.
    pub fn from_value(depth: u32, value: &BigUint) -> Result<Self> {
        if value.bits() > depth as u64 {
            return Err(Error::Input(format!(
                "address value {value} does not fit in depth {depth}"
            )));
        }
        let bits = (0..depth)
            .map(|i| value.bit((depth - 1 - i) as u64))
            .collect();
        Ok(Address { bits })
    }

    pub fn depth(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn value(&self) -> BigUint {
        let mut v = BigUint::zero();
        for (i, &b) in self.bits.iter().rev().enumerate() {
            if b {
                v.set_bit(i as u64, true);
            }
        }
        v
    }
}

impl std::str::FromStr for Address {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Input(format!("bad address {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Address::from_bits)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Empty,
    Full,
    Split(Arc<Node>, Arc<Node>, u32),
}

impl Node {
    fn split(lo: Node, hi: Node) -> Node {
        match (&lo, &hi) {
            (Node::Empty, Node::Empty) => Node::Empty,
            (Node::Full, Node::Full) => Node::Full,
            _ => {
                let depth = 1 + lo.height().max(hi.height());
                Node::Split(Arc::new(lo), Arc::new(hi), depth)
            }
        }
    }

    fn height(&self) -> u32 {
        match self {
            Node::Split(_, _, d) => *d,
            _ => 0,
        }
    }

    fn union(a: &Node, b: &Node) -> Node {
        match (a, b) {
            (Node::Full, _) | (_, Node::Full) => Node::Full,
            (Node::Empty, x) | (x, Node::Empty) => x.clone(),
            (Node::Split(a0, a1, _), Node::Split(b0, b1, _)) => {
                Node::split(Node::union(a0, b0), Node::union(a1, b1))
            }
        }
    }

    fn intersect(a: &Node, b: &Node) -> Node {
        match (a, b) {
            (Node::Empty, _) | (_, Node::Empty) => Node::Empty,
            (Node::Full, x) | (x, Node::Full) => x.clone(),
            (Node::Split(a0, a1, _), Node::Split(b0, b1, _)) => {
                Node::split(Node::intersect(a0, b0), Node::intersect(a1, b1))
            }
        }
    }

    fn difference(a: &Node, b: &Node) -> Node {
        match (a, b) {
            (Node::Empty, _) | (_, Node::Full) => Node::Empty,
            (x, Node::Empty) => x.clone(),
            (Node::Full, x) => Node::complement(x),
            (Node::Split(a0, a1, _), Node::Split(b0, b1, _)) => {
                Node::split(Node::difference(a0, b0), Node::difference(a1, b1))
            }
        }
    }

    fn complement(a: &Node) -> Node {
        match a {
            Node::Empty => Node::Full,
            Node::Full => Node::Empty,
            Node::Split(lo, hi, _) => Node::split(Node::complement(lo), Node::complement(hi)),
        }
    }

    fn is_subset(a: &Node, b: &Node) -> bool {
        match (a, b) {
            (Node::Empty, _) | (_, Node::Full) => true,
            (_, Node::Empty) | (Node::Full, _) => false,
            (Node::Split(a0, a1, _), Node::Split(b0, b1, _)) => {
                Node::is_subset(a0, b0) && Node::is_subset(a1, b1)
            }
        }
    }

    fn is_disjoint(a: &Node, b: &Node) -> bool {
        match (a, b) {
            (Node::Empty, _) | (_, Node::Empty) => true,
            (Node::Full, _) | (_, Node::Full) => false,
            (Node::Split(a0, a1, _), Node::Split(b0, b1, _)) => {
                Node::is_disjoint(a0, b0) && Node::is_disjoint(a1, b1)
            }
        }
    }
}

/// A clopen subset of the Cantor space with finite support.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    root: Node,
}

impl ClopenSet {
    pub fn empty() -> Self {
        ClopenSet { root: Node::Empty }
    }

    pub fn whole() -> Self {
        ClopenSet { root: Node::Full }
    }

    /// The basic open set of all sequences extending `address`.
    pub fn cylinder(address: &Address) -> Self {
        let mut node = Node::Full;
        for &bit in address.bits().iter().rev() {
            node = if bit {
                Node::split(Node::Empty, node)
            } else {
                Node::split(node, Node::Empty)
            };
        }
        ClopenSet { root: node }
    }

    /// Union of the cylinders of the given addresses.
    pub fn from_addresses<'a>(addresses: impl IntoIterator<Item = &'a Address>) -> Self {
        addresses
            .into_iter()
            .fold(ClopenSet::empty(), |acc, a| acc.union(&ClopenSet::cylinder(a)))
    }

    /// Convenience constructor from binary strings such as `["00", "11"]`.
    pub fn from_strs(addresses: &[&str]) -> Result<Self> {
        let parsed = addresses
            .iter()
            .map(|s| s.parse::<Address>())
            .collect::<Result<Vec<_>>>()?;
        Ok(ClopenSet::from_addresses(&parsed))
    }

    /// Builds the set whose depth-`depth` bitmask is `mask` (bit `i` is the
    /// address with value `i`).
    pub fn from_mask(depth: u32, mask: &[bool]) -> Result<Self> {
        if mask.len() as u64 != 1u64 << depth {
            return Err(Error::Input(format!(
                "mask length {} does not match depth {depth}",
                mask.len()
            )));
        }
        fn build(mask: &[bool]) -> Node {
            if mask.len() == 1 {
                return if mask[0] { Node::Full } else { Node::Empty };
            }
            let (lo, hi) = mask.split_at(mask.len() / 2);
            Node::split(build(lo), build(hi))
        }
        Ok(ClopenSet { root: build(mask) })
    }

    /// Minimal support depth.
    pub fn depth(&self) -> u32 {
        self.root.height()
    }

    pub fn is_empty(&self) -> bool {
        self.root == Node::Empty
    }

    pub fn is_whole(&self) -> bool {
        self.root == Node::Full
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet {
            root: Node::union(&self.root, &other.root),
        }
    }

    pub fn intersect(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet {
            root: Node::intersect(&self.root, &other.root),
        }
    }

    pub fn difference(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet {
            root: Node::difference(&self.root, &other.root),
        }
    }

    pub fn complement(&self) -> ClopenSet {
        ClopenSet {
            root: Node::complement(&self.root),
        }
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        Node::is_subset(&self.root, &other.root)
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> bool {
        Node::is_disjoint(&self.root, &other.root)
    }

    /// Exact product measure.
    pub fn measure(&self) -> Dyadic {
        fn go(node: &Node, depth: u64) -> Dyadic {
            match node {
                Node::Empty => Dyadic::zero(),
                Node::Full => Dyadic::pow2_inv(depth),
                Node::Split(lo, hi, _) => &go(lo, depth + 1) + &go(hi, depth + 1),
            }
        }
        go(&self.root, 0)
    }

    /// Number of depth-`depth` addresses whose cylinders lie inside the set.
    pub fn count_addresses_at(&self, depth: u32) -> BigUint {
        fn go(node: &Node, at: u32, depth: u32) -> BigUint {
            match node {
                Node::Empty => BigUint::zero(),
                Node::Full => BigUint::one() << (depth - at) as usize,
                Node::Split(lo, hi, _) => {
                    if at == depth {
                        BigUint::zero()
                    } else {
                        go(lo, at + 1, depth) + go(hi, at + 1, depth)
                    }
                }
            }
        }
        go(&self.root, 0, depth)
    }

    /// The `limit` lexicographically smallest depth-`depth` addresses whose
    /// cylinders lie inside the set.
    pub fn first_addresses_at(&self, depth: u32, limit: usize) -> Vec<Address> {
        fn go(node: &Node, path: &mut Vec<bool>, depth: u32, limit: usize, out: &mut Vec<Address>) {
            if out.len() >= limit {
                return;
            }
            match node {
                Node::Empty => {}
                Node::Full => {
                    let free = depth as usize - path.len();
                    let mut suffix = BigUint::zero();
                    let end = BigUint::one() << free;
                    while suffix < end && out.len() < limit {
                        let mut bits = path.clone();
                        bits.extend((0..free).map(|i| suffix.bit((free - 1 - i) as u64)));
                        out.push(Address::from_bits(bits));
                        suffix += 1u32;
                    }
                }
                Node::Split(lo, hi, _) => {
                    if path.len() == depth as usize {
                        return;
                    }
                    path.push(false);
                    go(lo, path, depth, limit, out);
                    path.pop();
                    path.push(true);
                    go(hi, path, depth, limit, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut Vec::new(), depth, limit, &mut out);
        out
    }

    /// The lexicographically least depth-`depth` address whose cylinder is
    /// inside the set, if any.
    pub fn leftmost_address_at(&self, depth: u32) -> Option<Address> {
        self.first_addresses_at(depth, 1).pop()
    }

    /// All depth-`depth` addresses inside the set. The depth must be at least
    /// the set's own depth for this to describe the set completely.
    pub fn addresses_at(&self, depth: u32) -> Vec<Address> {
        self.first_addresses_at(depth, usize::MAX)
    }

    /// Whether the cylinder of `address` lies inside the set.
    pub fn contains_cylinder(&self, address: &Address) -> bool {
        ClopenSet::cylinder(address).is_subset(self)
    }

    /// Depth-`depth` bitmask in address order (only for small depths).
    pub fn to_mask(&self, depth: u32) -> Result<Vec<bool>> {
        if depth > 24 {
            return Err(Error::DepthExhausted(format!(
                "bitmask view limited to depth 24, asked for {depth}"
            )));
        }
        let mut mask = vec![false; 1usize << depth];
        for a in self.addresses_at(depth) {
            let i = a
                .bits()
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
            mask[i] = true;
        }
        Ok(mask)
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ClopenSet {
    /// Lists the maximal cylinders, e.g. `{00, 11}`; the whole space is `{ε}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(node: &Node, path: &mut String, out: &mut Vec<String>) {
            match node {
                Node::Empty => {}
                Node::Full => out.push(if path.is_empty() { "ε".into() } else { path.clone() }),
                Node::Split(lo, hi, _) => {
                    path.push('0');
                    go(lo, path, out);
                    path.pop();
                    path.push('1');
                    go(hi, path, out);
                    path.pop();
                }
            }
        }
        let mut parts = Vec::new();
        go(&self.root, &mut String::new(), &mut parts);
        write!(f, "{{{}}}", parts.join(", "))
    }
}
