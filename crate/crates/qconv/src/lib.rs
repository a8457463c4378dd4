pub mod apps;
pub mod convert;
pub mod decider;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod phasesim;
pub mod random;
pub mod spanprog;

pub use error::{Error, Result};
