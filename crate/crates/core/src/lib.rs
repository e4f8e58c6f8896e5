//! Parallel greedy best-first search over finite state-space topologies.
//!
//! This crate is `no_std` (it needs `alloc`) and holds everything that is pure
//! computation:
//!
//! * [`topology`]: the [`StateSpace`] abstraction, explicit topologies and
//!   solution paths.
//! * [`domains`]: built-in generators (plateau chains, random graphs, sliding
//!   tiles, grid navigation).
//! * [`format`]: the line-based topology file format.
//! * [`oracle`]: high-water marks and two independent computations of the bench
//!   transition system (BTS), plus a trace checker for BTS-constrainedness.
//! * [`engine`]: sequential GBFS, the constrained parallel template with and
//!   without separate generation and evaluation (SGE), pluggable expansion
//!   constraints, and a seeded deterministic scheduler.
//!
//! The threaded runtime, file formats and the benchmark CLI live in the `pgbfs`
//! crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod domains;
pub mod engine;
pub mod format;
pub mod oracle;
pub mod topology;

pub use topology::{ExplicitTopology, SolutionPath, StateId, StateSpace, TopologyError};
