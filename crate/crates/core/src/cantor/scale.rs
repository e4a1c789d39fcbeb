use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite prefix `h(0) < h(1) < ... < h(n_max)` of the measure scale: stage
/// `n` works with clopen sets of measure `2^(-h(n))`. Every scale satisfies
/// `2^(h(n) - h(n-1)) >= n + 1`, so a stage-`(n-1)` set has room for `n + 1`
/// disjoint stage-`n` sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct ScaleFunction {
    values: Vec<u64>,
}

/// Named scale presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalePreset {
    /// `h(n) = n^2`.
    NSquared,
    /// `h(0) = 0`, `h(n) = h(n-1) + ceil(log2(n+1))`, the slowest admissible growth.
    MinLog,
}

pub const DEFAULT_MIN_LOG_STAGES: usize = 2048;
pub const DEFAULT_N_SQUARED_STAGES: usize = 256;

impl ScaleFunction {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("scale function needs h(0)".into()));
        }
        for n in 1..values.len() {
            let (prev, cur) = (values[n - 1], values[n]);
            if cur <= prev {
                return Err(Error::Validation(format!(
                    "scale not strictly increasing at n={n}: h({})={prev}, h({n})={cur}",
                    n - 1
                )));
            }
            let gap = cur - prev;
            // 2^gap >= n + 1
            if gap < 64 && (1u128 << gap) < (n as u128 + 1) {
                return Err(Error::Validation(format!(
                    "scale gap too small at n={n}: 2^{gap} < {}",
                    n + 1
                )));
            }
        }
        Ok(ScaleFunction { values })
    }

    pub fn preset(preset: ScalePreset, n_max: usize) -> Self {
        let values = match preset {
            ScalePreset::NSquared => (0..=n_max as u64).map(|n| n * n).collect(),
            ScalePreset::MinLog => {
                let mut v = vec![0u64];
                for n in 1..=n_max as u64 {
                    let step = 64 - n.leading_zeros() as u64; // ceil(log2(n + 1))
                    v.push(v[v.len() - 1] + step);
                }
                v
            }
        };
        ScaleFunction::new(values).expect("presets satisfy the scale constraint")
    }

    pub fn n_squared() -> Self {
        ScaleFunction::preset(ScalePreset::NSquared, DEFAULT_N_SQUARED_STAGES)
    }

    pub fn min_log() -> Self {
        ScaleFunction::preset(ScalePreset::MinLog, DEFAULT_MIN_LOG_STAGES)
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `h(n)`, or `DepthExhausted` past the end of the prefix.
    pub fn get(&self, n: usize) -> Result<u64> {
        self.values.get(n).copied().ok_or_else(|| {
            Error::DepthExhausted(format!(
                "stage {n} beyond scale prefix (n_max = {})",
                self.n_max()
            ))
        })
    }
}

impl TryFrom<Vec<u64>> for ScaleFunction {
    type Error = Error;
    fn try_from(values: Vec<u64>) -> Result<Self> {
        ScaleFunction::new(values)
    }
}

impl From<ScaleFunction> for Vec<u64> {
    fn from(s: ScaleFunction) -> Vec<u64> {
        s.values
    }
}
