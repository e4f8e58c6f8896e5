//! Search engines.
//!
//! [`gbfs_sequential`] is the reference. The parallel template is a single
//! worker state machine (`worker`) written against [`sync::LockFamily`] and
//! [`sync::WorkerClock`]; [`deterministic_run`] steps it cooperatively on a
//! simulated clock, and the `pgbfs` crate runs the same machine on OS threads.

pub mod constraint;
mod deterministic;
mod sequential;
pub mod structures;
pub mod sync;
pub mod trace;
#[doc(hidden)]
pub mod worker;

use alloc::sync::Arc;
use core::fmt;

pub use constraint::{Candidate, ExpansionConstraint, InflightEntry, InflightMinH, InflightRegistry, NoConstraint};
pub use deterministic::{deterministic_run, Interleaving};
pub use sequential::{gbfs_sequential, gbfs_sequential_with};
pub use trace::{Event, EventKind, SearchTrace, TraceViolation};

use crate::topology::{PathError, SolutionPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Algorithm {
    Gbfs,
    Kpgbfs,
    Cpgbfs,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gbfs => "gbfs",
            Algorithm::Kpgbfs => "kpgbfs",
            Algorithm::Cpgbfs => "cpgbfs",
        }
    }
}

#[derive(Clone)]
pub enum ConstraintChoice {
    None,
    InflightMinH,
    Custom(Arc<dyn ExpansionConstraint>),
}

impl ConstraintChoice {
    pub fn name(&self) -> &str {
        match self {
            ConstraintChoice::None => "none",
            ConstraintChoice::InflightMinH => "inflight-minh",
            ConstraintChoice::Custom(c) => c.name(),
        }
    }
}

impl fmt::Debug for ConstraintChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintChoice::Custom(c) => write!(f, "Custom({})", c.name()),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    /// OS threads and the monotonic clock (`pgbfs` crate only).
    Real,
    Deterministic { seed: u64 },
}

/// Parameters of the simulated timeline used by the deterministic scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Simulation {
    /// Simulated cost of one exclusive section.
    pub section_cost_ns: u64,
    pub interleaving: Interleaving,
}

impl Default for Simulation {
    fn default() -> Self {
        Simulation { section_cost_ns: 1_000, interleaving: Interleaving::Timed }
    }
}

/// Rough per-state memory footprint used to turn the memory limit into a
/// bound on admitted states.
pub const ESTIMATED_BYTES_PER_STATE: u64 = 64;

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub algorithm: Algorithm,
    /// Ignored by `Kpgbfs` and `Gbfs`.
    pub constraint: ConstraintChoice,
    pub sge: bool,
    pub workers: usize,
    pub time_limit_ns: Option<u64>,
    pub memory_limit_bytes: Option<u64>,
    pub heuristic_delay_ns: u64,
    pub scheduler: Scheduler,
    pub simulation: Simulation,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            algorithm: Algorithm::Gbfs,
            constraint: ConstraintChoice::InflightMinH,
            sge: false,
            workers: 1,
            time_limit_ns: None,
            memory_limit_bytes: None,
            heuristic_delay_ns: 50_000,
            scheduler: Scheduler::Deterministic { seed: 0 },
            simulation: Simulation::default(),
        }
    }
}

impl EngineConfig {
    pub fn gbfs() -> Self {
        Self::default()
    }

    pub fn kpgbfs(workers: usize) -> Self {
        EngineConfig { algorithm: Algorithm::Kpgbfs, constraint: ConstraintChoice::None, workers, ..Self::default() }
    }

    pub fn cpgbfs(workers: usize, constraint: ConstraintChoice) -> Self {
        EngineConfig { algorithm: Algorithm::Cpgbfs, constraint, workers, ..Self::default() }
    }

    pub fn with_sge(mut self, sge: bool) -> Self {
        self.sge = sge;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scheduler = Scheduler::Deterministic { seed };
        self
    }

    pub fn with_delay_ns(mut self, ns: u64) -> Self {
        self.heuristic_delay_ns = ns;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.workers == 0 {
            return Err(EngineError::InvalidConfig("workers must be >= 1"));
        }
        if self.algorithm == Algorithm::Gbfs && self.workers != 1 {
            return Err(EngineError::InvalidConfig("sequential GBFS runs with exactly one worker"));
        }
        if self.algorithm == Algorithm::Gbfs && self.sge {
            return Err(EngineError::InvalidConfig("sge needs a parallel engine"));
        }
        Ok(())
    }

    /// The constraint actually applied. KPGBFS is the template with the
    /// always-true constraint.
    pub fn effective_constraint(&self) -> Arc<dyn ExpansionConstraint> {
        match (self.algorithm, &self.constraint) {
            (Algorithm::Cpgbfs, ConstraintChoice::InflightMinH) => Arc::new(InflightMinH),
            (Algorithm::Cpgbfs, ConstraintChoice::Custom(c)) => c.clone(),
            _ => Arc::new(NoConstraint),
        }
    }

    pub fn constraint_name(&self) -> &str {
        match self.algorithm {
            Algorithm::Cpgbfs => self.constraint.name(),
            _ => "none",
        }
    }

    /// Admitted-state bound derived from the memory limit.
    pub fn state_limit(&self) -> Option<usize> {
        self.memory_limit_bytes
            .map(|b| (b / ESTIMATED_BYTES_PER_STATE).max(1) as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FailCause {
    Time,
    Memory,
}

impl FailCause {
    pub fn name(self) -> &'static str {
        match self {
            FailCause::Time => "time",
            FailCause::Memory => "memory",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Solved(SolutionPath),
    Unsolvable,
    LimitExceeded(FailCause),
}

impl Outcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, Outcome::Solved(_))
    }

    pub fn path(&self) -> Option<&SolutionPath> {
        match self {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchStats {
    pub expansions: u64,
    /// Heuristic evaluations, the initial state included.
    pub evaluations: u64,
    /// Evaluations of states that never entered Open.
    pub wasted_evaluations: u64,
    /// From the start of the search loop to the result, in (possibly
    /// simulated) nanoseconds.
    pub elapsed_ns: u64,
    pub peak_open: usize,
    pub idle_ns: alloc::vec::Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
    pub trace: SearchTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("scheduler {0:?} is not available here")]
    UnsupportedScheduler(Scheduler),
    #[error("deterministic scheduler has no runnable worker")]
    Deadlock,
    #[error("goal path could not be reconstructed: {0}")]
    Path(#[from] PathError),
}
