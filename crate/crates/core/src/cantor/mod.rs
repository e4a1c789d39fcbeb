//! Clopen algebra on the Cantor space and the stage-indexed enumeration of
//! clopen sets of measure `2^(-h(n))`.

mod clopen;
mod enumerate;
mod scale;

pub use clopen::{Address, ClopenSet};
pub use enumerate::{CantorIndex, ClopenIndex, DEFAULT_DEPTH_SLACK};
pub use scale::{ScaleFunction, ScalePreset, DEFAULT_MIN_LOG_STAGES, DEFAULT_N_SQUARED_STAGES};
