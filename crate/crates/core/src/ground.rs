use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::cantor::ClopenIndex;
use crate::jsonint::JsonIndex;

/// A ground-model function `omega -> omega`, given by a finite table followed
/// by an eventually-constant tail.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundFunction {
    pub name: String,
    pub prefix: Vec<JsonIndex>,
    pub tail: JsonIndex,
}

impl GroundFunction {
    pub fn new(name: impl Into<String>, prefix: Vec<u64>, tail: u64) -> Self {
        GroundFunction {
            name: name.into(),
            prefix: prefix.into_iter().map(|v| JsonIndex(v.into())).collect(),
            tail: JsonIndex(tail.into()),
        }
    }

    /// The constant function.
    pub fn constant(name: impl Into<String>, value: u64) -> Self {
        GroundFunction::new(name, Vec::new(), value)
    }

    pub fn eval(&self, n: usize) -> ClopenIndex {
        self.prefix.get(n).unwrap_or(&self.tail).0.clone()
    }

    pub fn eval_u64(&self, n: usize) -> Option<u64> {
        num_traits::ToPrimitive::to_u64(&self.eval(n))
    }

    pub fn values(&self, range: std::ops::Range<usize>) -> Vec<BigUint> {
        range.map(|n| self.eval(n)).collect()
    }
}

impl fmt::Display for GroundFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
