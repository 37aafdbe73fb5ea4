//! Exact computation and simulation of ancestor collapse in sequential
//! resampling samplers for graph partitions.
//!
//! The crate is organised around four pieces:
//!
//! * [`analytic`] — exact one-step laws, the absorbing active-count chain and
//!   the recursive bounding sequences for the expected number of surviving
//!   ancestors.
//! * [`diagram`] — descendancy diagrams under uniform and non-uniform parent
//!   selection, descendant decorations and the repetition statistics read off
//!   them.
//! * [`partition`] — a small spanning-tree based sequential partitioner for
//!   grid-scale graphs, with brute-force enumeration oracles.
//! * [`crs`] — the controlled repetition sampler and an empirical weak-CLT
//!   harness.
//!
//! All randomness flows through [`rng::stream_rng`], which derives an
//! independent generator from a root seed and a named, indexed stream, so
//! every trial or particle is reproducible on its own.

pub mod analytic;
pub mod crs;
pub mod diagram;
mod error;
pub mod io;
pub mod partition;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
