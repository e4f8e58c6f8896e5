use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DomainError;
use crate::topology::{HValue, StateId, StateSpace};

/// 4-connected grid navigation; state id is `y * width + x` and the
/// heuristic is the Manhattan distance to the goal cell.
#[derive(Debug, Clone)]
pub struct GridWorld {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
    start: StateId,
    goal: StateId,
}

const MAX_ATTEMPTS: u32 = 1000;

impl GridWorld {
    pub fn new(
        width: u32,
        height: u32,
        blocked: Vec<bool>,
        start: (u32, u32),
        goal: (u32, u32),
    ) -> Result<Self, DomainError> {
        if width == 0 || height == 0 || blocked.len() != (width * height) as usize {
            return Err(DomainError::InvalidParameters("bad grid dimensions".into()));
        }
        if start.0 >= width || start.1 >= height || goal.0 >= width || goal.1 >= height {
            return Err(DomainError::InvalidParameters("start or goal outside the grid".into()));
        }
        let g = GridWorld {
            width,
            height,
            blocked,
            start: StateId(start.1 * width + start.0),
            goal: StateId(goal.1 * width + goal.0),
        };
        if g.blocked[g.start.index()] || g.blocked[g.goal.index()] {
            return Err(DomainError::InvalidParameters("start or goal is blocked".into()));
        }
        Ok(g)
    }

    /// Corner-to-corner instance with each other cell blocked with
    /// probability `obstacle_density`; redrawn until the goal is reachable.
    pub fn random(width: u32, height: u32, obstacle_density: f64, seed: u64) -> Result<Self, DomainError> {
        if !(0.0..1.0).contains(&obstacle_density) {
            return Err(DomainError::InvalidParameters("obstacle_density must be in [0, 1)".into()));
        }
        if width == 0 || height == 0 {
            return Err(DomainError::InvalidParameters("bad grid dimensions".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = (width * height) as usize;
        for _ in 0..MAX_ATTEMPTS {
            let mut blocked: Vec<bool> = (0..cells).map(|_| rng.gen_bool(obstacle_density)).collect();
            blocked[0] = false;
            blocked[cells - 1] = false;
            let g = GridWorld::new(width, height, blocked, (0, 0), (width - 1, height - 1))?;
            if g.goal_reachable() {
                return Ok(g);
            }
        }
        Err(DomainError::GenerationFailed(MAX_ATTEMPTS))
    }

    fn xy(&self, s: StateId) -> (u32, u32) {
        (s.0 % self.width, s.0 / self.width)
    }

    fn goal_reachable(&self) -> bool {
        let mut seen = vec![false; self.blocked.len()];
        let mut queue = VecDeque::from([self.start]);
        seen[self.start.index()] = true;
        let mut buf = Vec::new();
        while let Some(s) = queue.pop_front() {
            if s == self.goal {
                return true;
            }
            buf.clear();
            self.successors(s, &mut buf);
            for &t in &buf {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    queue.push_back(t);
                }
            }
        }
        false
    }
}

impl StateSpace for GridWorld {
    fn initial(&self) -> StateId {
        self.start
    }

    fn is_goal(&self, s: StateId) -> bool {
        s == self.goal
    }

    fn successors(&self, s: StateId, out: &mut Vec<StateId>) {
        if self.is_goal(s) {
            return;
        }
        let (x, y) = self.xy(s);
        let w = self.width;
        let candidates = [
            (y > 0).then(|| s.0 - w),
            (y + 1 < self.height).then(|| s.0 + w),
            (x > 0).then(|| s.0 - 1),
            (x + 1 < w).then(|| s.0 + 1),
        ];
        out.extend(
            candidates
                .into_iter()
                .flatten()
                .filter(|&c| !self.blocked[c as usize])
                .map(StateId),
        );
    }

    fn heuristic(&self, s: StateId) -> HValue {
        let (x, y) = self.xy(s);
        let (gx, gy) = self.xy(self.goal);
        (x.abs_diff(gx) + y.abs_diff(gy)) as HValue
    }

    fn state_bound(&self) -> usize {
        self.blocked.len()
    }
}
