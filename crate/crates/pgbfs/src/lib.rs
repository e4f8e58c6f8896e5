//! Threaded runtime, file IO, benchmark harness and CLI on top of
//! [`pgbfs_core`].
//!
//! * [`runtime`]: the worker state machine on OS threads; [`runtime::solve`]
//!   dispatches on the configured scheduler.
//! * [`io`]: topology files, domain loading, result JSON and JSONL traces.
//! * [`bench`]: benchmark sweeps and the CSV run record.
//! * [`aggregate`]: geometric means, coverage, speedup and markdown tables.
//! * [`plot`]: per-instance scatter data.
//! * [`cli`]: the `pgbfs` command.

pub mod aggregate;
pub mod bench;
pub mod cli;
pub mod io;
pub mod plot;
pub mod runtime;

pub use pgbfs_core;
