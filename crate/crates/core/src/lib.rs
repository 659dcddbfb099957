//! Non-malleable codes against small-depth circuit tampering, built from
//! pseudorandom restrictions, reconstructable probabilistic encodings and a
//! leaky-local to split-state reduction, plus an experiment harness.

pub mod bitlinalg;
pub mod circuits;
pub mod codes;
pub mod error;
pub mod harness;
pub mod nmcpipeline;
pub mod params;
pub mod prg;
pub mod reductions;
pub mod restrictions;

pub use bitlinalg::{BitVec, Gf2Matrix, SolutionSet};
pub use error::{Error, Result};
