//! Slalom combinatorics for null sets and a finite simulator for a ranked
//! iteration of localization forcing.

pub mod cantor;
pub mod dyadic;
pub mod error;
pub mod forcing;
pub mod generic;
pub mod ground;
pub mod jsonint;
pub mod loc;
pub mod names;
pub mod poset;
pub mod random;
pub mod scenario;
pub mod slalom;

pub use error::{Error, Result};
