//! State-space topologies: states, successors, goals and heuristic values.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rustc_hash::FxBuildHasher;
use sha2::{Digest, Sha256};

/// Dense index of a state. Ids of a topology are contiguous from 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for StateId {
    fn from(i: usize) -> Self {
        StateId(i as u32)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Heuristic values are non-negative integers; ties are exact.
pub type HValue = u64;

/// Child -> parent links recorded by a search. The initial state has no entry.
pub type ParentLinks = hashbrown::HashMap<StateId, StateId, FxBuildHasher>;

/// The successor/heuristic interface every engine and oracle works against.
///
/// Implementations must be pure: `successors` and `heuristic` depend only on
/// the state. Goal states have no successors and `h = 0`, and no state is its
/// own successor.
pub trait StateSpace {
    fn initial(&self) -> StateId;
    fn is_goal(&self, s: StateId) -> bool;
    /// Appends the successors of `s` to `out`, in the topology's fixed order.
    fn successors(&self, s: StateId, out: &mut Vec<StateId>);
    fn heuristic(&self, s: StateId) -> HValue;
    /// Exclusive upper bound on state ids.
    fn state_bound(&self) -> usize;

    /// Present only for explicit (fully tabulated) topologies.
    fn as_explicit(&self) -> Option<&ExplicitTopology> {
        None
    }

    fn fingerprint(&self) -> Option<u64> {
        self.as_explicit().map(ExplicitTopology::fingerprint)
    }
}

impl<T: StateSpace + ?Sized> StateSpace for &T {
    fn initial(&self) -> StateId {
        (**self).initial()
    }
    fn is_goal(&self, s: StateId) -> bool {
        (**self).is_goal(s)
    }
    fn successors(&self, s: StateId, out: &mut Vec<StateId>) {
        (**self).successors(s, out)
    }
    fn heuristic(&self, s: StateId) -> HValue {
        (**self).heuristic(s)
    }
    fn state_bound(&self) -> usize {
        (**self).state_bound()
    }
    fn as_explicit(&self) -> Option<&ExplicitTopology> {
        (**self).as_explicit()
    }
    fn fingerprint(&self) -> Option<u64> {
        (**self).fingerprint()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("topology has no states")]
    Empty,
    #[error("initial state {0} is out of range")]
    InitialOutOfRange(StateId),
    #[error("topology has no goal state")]
    NoGoal,
    #[error("goal {0} has successors")]
    GoalHasSuccessors(StateId),
    #[error("goal {state} has nonzero h ({h})")]
    GoalNonzeroH { state: StateId, h: HValue },
    #[error("state {0} is its own successor")]
    SelfLoop(StateId),
    #[error("edge {from} -> {to} points outside the topology")]
    SuccessorOutOfRange { from: StateId, to: StateId },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: StateId, to: StateId },
    #[error("per-state tables disagree in length")]
    ShapeMismatch,
    #[error("state space exceeds the materialization cap of {cap} states")]
    TooLarge { cap: usize },
}

/// A fully tabulated topology.
#[derive(Clone, PartialEq, Eq)]
pub struct ExplicitTopology {
    successors: Vec<Vec<StateId>>,
    h: Vec<HValue>,
    goal: Vec<bool>,
    initial: StateId,
}

impl fmt::Debug for ExplicitTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitTopology")
            .field("num_states", &self.num_states())
            .field("initial", &self.initial)
            .field("fingerprint", &format_args!("{:016x}", self.fingerprint()))
            .finish()
    }
}

impl ExplicitTopology {
    /// Builds and validates a topology. `successors[i]` is the ordered successor
    /// list of state `i`.
    pub fn new(
        h: Vec<HValue>,
        goal: Vec<bool>,
        successors: Vec<Vec<StateId>>,
        initial: StateId,
    ) -> Result<Self, TopologyError> {
        let t = ExplicitTopology { successors, h, goal, initial };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let n = self.h.len();
        if n == 0 {
            return Err(TopologyError::Empty);
        }
        if self.goal.len() != n || self.successors.len() != n {
            return Err(TopologyError::ShapeMismatch);
        }
        if self.initial.index() >= n {
            return Err(TopologyError::InitialOutOfRange(self.initial));
        }
        if !self.goal.iter().any(|&g| g) {
            return Err(TopologyError::NoGoal);
        }
        let mut seen = vec![u32::MAX; n];
        for (i, succ) in self.successors.iter().enumerate() {
            let from = StateId::from(i);
            if self.goal[i] {
                if self.h[i] != 0 {
                    return Err(TopologyError::GoalNonzeroH { state: from, h: self.h[i] });
                }
                if !succ.is_empty() {
                    return Err(TopologyError::GoalHasSuccessors(from));
                }
            }
            for &to in succ {
                if to.index() >= n {
                    return Err(TopologyError::SuccessorOutOfRange { from, to });
                }
                if to == from {
                    return Err(TopologyError::SelfLoop(from));
                }
                if seen[to.index()] == i as u32 {
                    return Err(TopologyError::DuplicateEdge { from, to });
                }
                seen[to.index()] = i as u32;
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.h.len()
    }

    pub fn succ(&self, s: StateId) -> &[StateId] {
        &self.successors[s.index()]
    }

    pub fn h_values(&self) -> &[HValue] {
        &self.h
    }

    pub fn goal_flags(&self) -> &[bool] {
        &self.goal
    }

    pub fn goals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.goal
            .iter()
            .enumerate()
            .filter(|(_, &g)| g)
            .map(|(i, _)| StateId::from(i))
    }

    pub fn num_edges(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    /// Stable 64-bit fingerprint over the canonical binary encoding.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update((self.num_states() as u64).to_le_bytes());
        hasher.update(self.initial.0.to_le_bytes());
        for i in 0..self.num_states() {
            hasher.update(self.h[i].to_le_bytes());
            hasher.update([self.goal[i] as u8]);
            hasher.update((self.successors[i].len() as u32).to_le_bytes());
            for s in &self.successors[i] {
                hasher.update(s.0.to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }

    /// Predecessor lists, in increasing order of the predecessor id.
    pub fn predecessors(&self) -> Vec<Vec<StateId>> {
        let mut pred = vec![Vec::new(); self.num_states()];
        for (i, succ) in self.successors.iter().enumerate() {
            for &t in succ {
                pred[t.index()].push(StateId::from(i));
            }
        }
        pred
    }

    /// States reachable from the initial state (including it).
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::new();
        seen[self.initial.index()] = true;
        queue.push_back(self.initial);
        while let Some(s) = queue.pop_front() {
            for &t in self.succ(s) {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    pub fn goal_reachable(&self) -> bool {
        self.reachable()
            .iter()
            .zip(&self.goal)
            .any(|(&r, &g)| r && g)
    }
}

impl StateSpace for ExplicitTopology {
    fn initial(&self) -> StateId {
        self.initial
    }
    fn is_goal(&self, s: StateId) -> bool {
        self.goal[s.index()]
    }
    fn successors(&self, s: StateId, out: &mut Vec<StateId>) {
        out.extend_from_slice(&self.successors[s.index()]);
    }
    fn heuristic(&self, s: StateId) -> HValue {
        self.h[s.index()]
    }
    fn state_bound(&self) -> usize {
        self.num_states()
    }
    fn as_explicit(&self) -> Option<&ExplicitTopology> {
        Some(self)
    }
}

/// Enumerates the states reachable from the initial state of `space` and
/// returns them as an explicit topology, relabelled in breadth-first order
/// (the initial state becomes 0). Successor order is preserved.
pub fn materialize<S: StateSpace + ?Sized>(
    space: &S,
    cap: usize,
) -> Result<ExplicitTopology, TopologyError> {
    let mut ids: hashbrown::HashMap<StateId, StateId, FxBuildHasher> = Default::default();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(space.initial(), StateId(0));
    order.push(space.initial());
    queue.push_back(space.initial());
    let mut successors: Vec<Vec<StateId>> = Vec::new();
    let mut buf = Vec::new();
    while let Some(s) = queue.pop_front() {
        buf.clear();
        space.successors(s, &mut buf);
        let mut local = Vec::with_capacity(buf.len());
        for &t in &buf {
            let next = StateId::from(ids.len());
            let id = *ids.entry(t).or_insert_with(|| {
                order.push(t);
                queue.push_back(t);
                next
            });
            if ids.len() > cap {
                return Err(TopologyError::TooLarge { cap });
            }
            local.push(id);
        }
        successors.push(local);
    }
    let h = order.iter().map(|&s| space.heuristic(s)).collect();
    let goal = order.iter().map(|&s| space.is_goal(s)).collect();
    ExplicitTopology::new(h, goal, successors, StateId(0))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("path is empty")]
    Empty,
    #[error("path starts at {0}, not at the initial state")]
    WrongStart(StateId),
    #[error("path ends at non-goal state {0}")]
    NotAGoal(StateId),
    #[error("{from} -> {to} is not a transition")]
    NotATransition { from: StateId, to: StateId },
    #[error("parent chain from {0} does not reach the initial state")]
    BrokenChain(StateId),
}

/// A path from the initial state to a goal.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolutionPath {
    pub states: Vec<StateId>,
}

impl SolutionPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn goal(&self) -> Option<StateId> {
        self.states.last().copied()
    }

    /// Checks the path edge by edge against `space`.
    pub fn validate<S: StateSpace + ?Sized>(&self, space: &S) -> Result<(), PathError> {
        let first = *self.states.first().ok_or(PathError::Empty)?;
        if first != space.initial() {
            return Err(PathError::WrongStart(first));
        }
        let last = *self.states.last().unwrap();
        if !space.is_goal(last) {
            return Err(PathError::NotAGoal(last));
        }
        let mut buf = Vec::new();
        for pair in self.states.windows(2) {
            buf.clear();
            space.successors(pair[0], &mut buf);
            if !buf.contains(&pair[1]) {
                return Err(PathError::NotATransition { from: pair[0], to: pair[1] });
            }
        }
        Ok(())
    }
}

/// Walks parent links from `goal` back to `initial`.
pub fn reconstruct_path(
    parents: &ParentLinks,
    initial: StateId,
    goal: StateId,
) -> Result<SolutionPath, PathError> {
    let mut states = vec![goal];
    let mut cur = goal;
    while cur != initial {
        // A chain longer than the link table must contain a cycle.
        if states.len() > parents.len() + 1 {
            return Err(PathError::BrokenChain(goal));
        }
        cur = *parents.get(&cur).ok_or(PathError::BrokenChain(goal))?;
        states.push(cur);
    }
    states.reverse();
    Ok(SolutionPath { states })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> ExplicitTopology {
        ExplicitTopology::new(
            vec![2, 1, 0],
            vec![false, false, true],
            vec![vec![StateId(1)], vec![StateId(2)], vec![]],
            StateId(0),
        )
        .unwrap()
    }

    #[test]
    fn rejects_goal_with_successors() {
        let err = ExplicitTopology::new(
            vec![1, 0],
            vec![false, true],
            vec![vec![StateId(1)], vec![StateId(0)]],
            StateId(0),
        )
        .unwrap_err();
        assert_eq!(err, TopologyError::GoalHasSuccessors(StateId(1)));
        assert_eq!(alloc::format!("{err}"), "goal 1 has successors");
    }

    #[test]
    fn rejects_goal_with_nonzero_h() {
        let err = ExplicitTopology::new(vec![3], vec![true], vec![vec![]], StateId(0)).unwrap_err();
        assert_eq!(alloc::format!("{err}"), "goal 0 has nonzero h (3)");
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let self_loop = ExplicitTopology::new(
            vec![1, 0],
            vec![false, true],
            vec![vec![StateId(0), StateId(1)], vec![]],
            StateId(0),
        );
        assert_eq!(self_loop.unwrap_err(), TopologyError::SelfLoop(StateId(0)));
        let dup = ExplicitTopology::new(
            vec![1, 0],
            vec![false, true],
            vec![vec![StateId(1), StateId(1)], vec![]],
            StateId(0),
        );
        assert!(matches!(dup.unwrap_err(), TopologyError::DuplicateEdge { .. }));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = chain();
        let mut b = chain();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.h[0] = 5;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn reconstruct_trivial_and_broken() {
        let parents = ParentLinks::default();
        let p = reconstruct_path(&parents, StateId(0), StateId(0)).unwrap();
        assert_eq!(p.states, vec![StateId(0)]);
        assert_eq!(
            reconstruct_path(&parents, StateId(0), StateId(2)),
            Err(PathError::BrokenChain(StateId(2)))
        );
        let mut cyclic = ParentLinks::default();
        cyclic.insert(StateId(1), StateId(2));
        cyclic.insert(StateId(2), StateId(1));
        assert!(reconstruct_path(&cyclic, StateId(0), StateId(2)).is_err());
    }

    #[test]
    fn path_validation() {
        let t = chain();
        let good = SolutionPath { states: vec![StateId(0), StateId(1), StateId(2)] };
        assert!(good.validate(&t).is_ok());
        let skip = SolutionPath { states: vec![StateId(0), StateId(2)] };
        assert!(matches!(skip.validate(&t), Err(PathError::NotATransition { .. })));
        let short = SolutionPath { states: vec![StateId(0), StateId(1)] };
        assert_eq!(short.validate(&t), Err(PathError::NotAGoal(StateId(1))));
    }

    #[test]
    fn materialize_relabels_from_initial() {
        let t = ExplicitTopology::new(
            vec![0, 1, 2],
            vec![true, false, false],
            vec![vec![], vec![StateId(0)], vec![StateId(1)]],
            StateId(2),
        )
        .unwrap();
        let m = materialize(&t, 10).unwrap();
        assert_eq!(m.initial(), StateId(0));
        assert_eq!(m.h_values(), &[2, 1, 0]);
        assert!(m.is_goal(StateId(2)));
        assert_eq!(materialize(&t, 2).unwrap_err(), TopologyError::TooLarge { cap: 2 });
    }
}
