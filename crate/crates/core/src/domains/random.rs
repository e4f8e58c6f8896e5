//! Small random topologies for oracle fuzzing.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DomainError;
use crate::topology::{ExplicitTopology, HValue, StateId};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomParams {
    pub num_states: usize,
    /// Probability of each forward edge `i -> j` (`j > i`). Back edges use a
    /// quarter of it.
    pub edge_density: f64,
    /// Non-goal heuristic values are drawn uniformly from `0..=h_max`.
    pub h_max: HValue,
    /// Clamped to `1..=num_states - 1`.
    pub goal_count: usize,
}

const MAX_ATTEMPTS: u32 = 1000;

/// State 0 is the initial state and the last `goal_count` ids are goals.
///
/// Forward edges keep most of the graph acyclic; back edges add cycles and
/// dead ends are allowed. If no goal is reachable the attempt is repaired by
/// wiring a random reachable non-goal state to a random goal.
pub fn gen_random(params: &RandomParams, seed: u64) -> Result<ExplicitTopology, DomainError> {
    let n = params.num_states;
    if n < 2 {
        return Err(DomainError::InvalidParameters("num_states must be >= 2".into()));
    }
    if !(0.0..=1.0).contains(&params.edge_density) {
        return Err(DomainError::InvalidParameters("edge_density must be in [0, 1]".into()));
    }
    let goals = params.goal_count.clamp(1, n - 1);
    let first_goal = n - goals;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..MAX_ATTEMPTS {
        let mut h: Vec<HValue> = vec![0; n];
        let mut goal = vec![false; n];
        let mut succ: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for i in 0..n {
            if i >= first_goal {
                goal[i] = true;
                continue;
            }
            h[i] = rng.gen_range(0..=params.h_max);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let p = if j > i { params.edge_density } else { params.edge_density / 4.0 };
                if rng.gen_bool(p) {
                    succ[i].push(StateId::from(j));
                }
            }
        }
        let mut t = ExplicitTopology::new(h.clone(), goal.clone(), succ.clone(), StateId(0))?;
        if !t.goal_reachable() {
            let reachable = t.reachable();
            let sources: Vec<usize> =
                (0..first_goal).filter(|&i| reachable[i]).collect();
            let src = sources[rng.gen_range(0..sources.len())];
            let dst = rng.gen_range(first_goal..n);
            succ[src].push(StateId::from(dst));
            t = ExplicitTopology::new(h, goal, succ, StateId(0))?;
        }
        if t.goal_reachable() {
            return Ok(t);
        }
    }
    Err(DomainError::GenerationFailed(MAX_ATTEMPTS))
}
