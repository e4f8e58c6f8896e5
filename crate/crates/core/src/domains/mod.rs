//! Built-in benchmark domains and the [`DomainSpec`] description that expands
//! deterministically into a topology.

mod grid;
mod plateau;
mod random;
mod tile;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use grid::GridWorld;
pub use plateau::{gen_plateau, gen_plateau_with_decoys, PlateauLayout};
pub use random::{gen_random, RandomParams};
pub use tile::TilePuzzle;

use crate::topology::{ExplicitTopology, HValue, StateId, StateSpace, TopologyError};

/// Which domain to build and with what parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum DomainKind {
    /// A topology file on disk; resolved by the `pgbfs` crate.
    ExplicitFile { path: String },
    /// `tiles` is row-major with 0 for the blank. When absent the instance is
    /// a seeded random walk of `scramble` moves away from the goal.
    SlidingTile {
        rows: u8,
        cols: u8,
        #[cfg_attr(feature = "serde", serde(default))]
        tiles: Option<Vec<u8>>,
        #[cfg_attr(feature = "serde", serde(default))]
        scramble: u32,
    },
    /// Start is the top-left cell, goal the bottom-right cell.
    GridNav { width: u32, height: u32, obstacle_density: f64 },
    PlateauSynthetic {
        depth: u32,
        width: u32,
        #[cfg_attr(feature = "serde", serde(default))]
        decoy_depth: u32,
    },
    RandomGraph { num_states: usize, edge_density: f64, h_max: HValue, goal_count: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DomainSpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: DomainKind,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, seed: u64) -> Self {
        DomainSpec { kind, seed }
    }

    pub fn plateau(depth: u32, width: u32, seed: u64) -> Self {
        DomainSpec::new(DomainKind::PlateauSynthetic { depth, width, decoy_depth: 0 }, seed)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DomainKind::ExplicitFile { .. } => "explicit-file",
            DomainKind::SlidingTile { .. } => "sliding-tile",
            DomainKind::GridNav { .. } => "grid-nav",
            DomainKind::PlateauSynthetic { .. } => "plateau-synthetic",
            DomainKind::RandomGraph { .. } => "random-graph",
        }
    }

    /// Short instance name used in benchmark records.
    pub fn label(&self) -> String {
        match &self.kind {
            DomainKind::ExplicitFile { path } => format!("file:{path}"),
            DomainKind::SlidingTile { rows, cols, tiles: Some(t), .. } => {
                let body: Vec<String> = t.iter().map(|v| format!("{v}")).collect();
                format!("tile{rows}x{cols}-{}", body.join("."))
            }
            DomainKind::SlidingTile { rows, cols, scramble, .. } => {
                format!("tile{rows}x{cols}-w{scramble}")
            }
            DomainKind::GridNav { width, height, obstacle_density } => {
                format!("grid{width}x{height}-p{obstacle_density}")
            }
            DomainKind::PlateauSynthetic { depth, width, decoy_depth } => {
                format!("plateau-d{depth}-x{width}-t{decoy_depth}")
            }
            DomainKind::RandomGraph { num_states, edge_density, h_max, goal_count } => {
                format!("random-n{num_states}-e{edge_density}-h{h_max}-g{goal_count}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("tile permutation is unsolvable (parity mismatch)")]
    UnsolvableTiles,
    #[error("goal unreachable after {0} attempts")]
    GenerationFailed(u32),
    #[error("explicit-file domains must be loaded through a file reader")]
    NeedsLoader,
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A concrete domain. Explicit topologies are tabulated; tile and grid
/// domains compute successors and heuristic values on demand.
#[derive(Debug, Clone)]
pub enum Domain {
    Explicit(ExplicitTopology),
    Tile(TilePuzzle),
    Grid(GridWorld),
}

/// Expands a spec into a domain. File-backed specs are rejected with
/// [`DomainError::NeedsLoader`].
pub fn make_domain(spec: &DomainSpec) -> Result<Domain, DomainError> {
    match &spec.kind {
        DomainKind::ExplicitFile { .. } => Err(DomainError::NeedsLoader),
        DomainKind::SlidingTile { rows, cols, tiles, scramble } => {
            let puzzle = match tiles {
                Some(t) => TilePuzzle::new(*rows, *cols, t)?,
                None => TilePuzzle::scrambled(*rows, *cols, *scramble, spec.seed)?,
            };
            Ok(Domain::Tile(puzzle))
        }
        DomainKind::GridNav { width, height, obstacle_density } => Ok(Domain::Grid(
            GridWorld::random(*width, *height, *obstacle_density, spec.seed)?,
        )),
        DomainKind::PlateauSynthetic { depth, width, decoy_depth } => {
            if *depth == 0 {
                return Err(DomainError::InvalidParameters("plateau depth must be >= 1".into()));
            }
            Ok(Domain::Explicit(gen_plateau_with_decoys(*depth, *width, *decoy_depth, spec.seed)))
        }
        DomainKind::RandomGraph { num_states, edge_density, h_max, goal_count } => {
            let params = RandomParams {
                num_states: *num_states,
                edge_density: *edge_density,
                h_max: *h_max,
                goal_count: *goal_count,
            };
            Ok(Domain::Explicit(gen_random(&params, spec.seed)?))
        }
    }
}

impl StateSpace for Domain {
    fn initial(&self) -> StateId {
        match self {
            Domain::Explicit(t) => t.initial(),
            Domain::Tile(t) => t.initial(),
            Domain::Grid(g) => g.initial(),
        }
    }
    fn is_goal(&self, s: StateId) -> bool {
        match self {
            Domain::Explicit(t) => t.is_goal(s),
            Domain::Tile(t) => t.is_goal(s),
            Domain::Grid(g) => g.is_goal(s),
        }
    }
    fn successors(&self, s: StateId, out: &mut Vec<StateId>) {
        match self {
            Domain::Explicit(t) => t.successors(s, out),
            Domain::Tile(t) => t.successors(s, out),
            Domain::Grid(g) => g.successors(s, out),
        }
    }
    fn heuristic(&self, s: StateId) -> HValue {
        match self {
            Domain::Explicit(t) => t.heuristic(s),
            Domain::Tile(t) => t.heuristic(s),
            Domain::Grid(g) => g.heuristic(s),
        }
    }
    fn state_bound(&self) -> usize {
        match self {
            Domain::Explicit(t) => t.state_bound(),
            Domain::Tile(t) => t.state_bound(),
            Domain::Grid(g) => g.state_bound(),
        }
    }
    fn as_explicit(&self) -> Option<&ExplicitTopology> {
        match self {
            Domain::Explicit(t) => Some(t),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_spec_same_topology() {
        let spec = DomainSpec::new(
            DomainKind::RandomGraph { num_states: 20, edge_density: 0.2, h_max: 6, goal_count: 2 },
            99,
        );
        let a = make_domain(&spec).unwrap();
        let b = make_domain(&spec).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn file_specs_need_a_loader() {
        let spec = DomainSpec::new(DomainKind::ExplicitFile { path: "x.topo".into() }, 0);
        assert_eq!(make_domain(&spec).unwrap_err(), DomainError::NeedsLoader);
    }
}
