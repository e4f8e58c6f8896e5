//! The shared search structures: Open, Closed, the Unevaluated queue and the
//! SGE evaluation table with its sibling groups.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Reverse;

use rustc_hash::FxBuildHasher;

use crate::topology::{HValue, ParentLinks, StateId};

type FxMap<K, V> = hashbrown::HashMap<K, V, FxBuildHasher>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenEntry {
    pub state: StateId,
    pub h: HValue,
    pub seq: u64,
}

/// Priority queue ordered by `(h, insertion sequence)`: lowest h first, FIFO
/// among ties.
#[derive(Debug, Default)]
pub struct OpenList {
    heap: BinaryHeap<Reverse<(HValue, u64, StateId)>>,
    next_seq: u64,
    peak: usize,
}

impl OpenList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the sequence number assigned to the entry.
    pub fn push(&mut self, state: StateId, h: HValue) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse((h, seq, state)));
        self.peak = self.peak.max(self.heap.len());
        seq
    }

    pub fn peek(&self) -> Option<OpenEntry> {
        self.heap.peek().map(|&Reverse((h, seq, state))| OpenEntry { state, h, seq })
    }

    pub fn pop(&mut self) -> Option<OpenEntry> {
        self.heap.pop().map(|Reverse((h, seq, state))| OpenEntry { state, h, seq })
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}

/// States admitted so far, with the parent each was admitted from.
#[derive(Debug, Default)]
pub struct ClosedSet {
    root: Option<StateId>,
    parents: ParentLinks,
}

impl ClosedSet {
    pub fn with_root(root: StateId) -> Self {
        ClosedSet { root: Some(root), parents: ParentLinks::default() }
    }

    /// Check-and-insert. Returns false if `s` was already admitted.
    pub fn insert(&mut self, s: StateId, parent: StateId) -> bool {
        if self.contains(s) {
            return false;
        }
        self.parents.insert(s, parent);
        true
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.root == Some(s) || self.parents.contains_key(&s)
    }

    pub fn len(&self) -> usize {
        self.parents.len() + self.root.is_some() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parents(&self) -> &ParentLinks {
        &self.parents
    }

    pub fn into_parents(self) -> ParentLinks {
        self.parents
    }
}

pub type GroupId = u64;

/// One entry of the Unevaluated queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingEval {
    pub state: StateId,
    pub parent: StateId,
    pub group: GroupId,
}

pub type UnevaluatedQueue = VecDeque<PendingEval>;

/// The successors of one expansion, inserted into Open together once every
/// member has a heuristic value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiblingGroup {
    pub parent: StateId,
    pub members: Vec<StateId>,
    pub remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalStatus {
    /// Being evaluated; the listed groups also wait for the result.
    Pending(Vec<GroupId>),
    Done(HValue),
}

/// SGE bookkeeping: the heuristic cache that prevents re-evaluation and the
/// open sibling groups.
#[derive(Debug, Default)]
pub struct EvalTable {
    status: FxMap<StateId, EvalStatus>,
    groups: FxMap<GroupId, SiblingGroup>,
    next_group: GroupId,
}

/// One member of a sibling group received its heuristic value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Credit {
    pub group: GroupId,
    pub parent: StateId,
    /// This was the group's last missing value.
    pub complete: bool,
}

/// What a worker should do with a dequeued entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    /// Already evaluated; the entry's group was credited.
    Known { h: HValue, credit: Credit },
    /// Someone else is evaluating it; the group was registered as a waiter.
    Waiting,
    /// The caller must evaluate it.
    Evaluate,
}

impl EvalTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_known(&mut self, s: StateId, h: HValue) {
        self.status.insert(s, EvalStatus::Done(h));
    }

    pub fn h(&self, s: StateId) -> Option<HValue> {
        match self.status.get(&s) {
            Some(EvalStatus::Done(h)) => Some(*h),
            _ => None,
        }
    }

    pub fn open_group(&mut self, parent: StateId, members: Vec<StateId>) -> GroupId {
        let id = self.next_group;
        self.next_group += 1;
        let remaining = members.len();
        self.groups.insert(id, SiblingGroup { parent, members, remaining });
        id
    }

    pub fn group(&self, id: GroupId) -> Option<&SiblingGroup> {
        self.groups.get(&id)
    }

    pub fn open_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn lookup(&mut self, item: &PendingEval) -> Lookup {
        match self.status.get_mut(&item.state) {
            Some(EvalStatus::Done(h)) => {
                let h = *h;
                Lookup::Known { h, credit: self.credit(item.group) }
            }
            Some(EvalStatus::Pending(waiters)) => {
                waiters.push(item.group);
                Lookup::Waiting
            }
            None => {
                self.status.insert(item.state, EvalStatus::Pending(Vec::new()));
                Lookup::Evaluate
            }
        }
    }

    /// Records the result for `item` and credits its group plus every waiting
    /// group, own group first.
    pub fn complete(&mut self, item: &PendingEval, h: HValue) -> Vec<Credit> {
        let waiters = match self.status.insert(item.state, EvalStatus::Done(h)) {
            Some(EvalStatus::Pending(w)) => w,
            _ => Vec::new(),
        };
        core::iter::once(item.group).chain(waiters).map(|g| self.credit(g)).collect()
    }

    pub fn take_group(&mut self, id: GroupId) -> Option<SiblingGroup> {
        self.groups.remove(&id)
    }

    fn credit(&mut self, id: GroupId) -> Credit {
        let group = self.groups.get_mut(&id).expect("credited group is open");
        group.remaining -= 1;
        Credit { group: id, parent: group.parent, complete: group.remaining == 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn open_is_h_then_fifo() {
        let mut open = OpenList::new();
        open.push(StateId(5), 2);
        open.push(StateId(6), 1);
        open.push(StateId(7), 2);
        open.push(StateId(8), 1);
        let order: Vec<u32> = core::iter::from_fn(|| open.pop()).map(|e| e.state.0).collect();
        assert_eq!(order, vec![6, 8, 5, 7]);
        assert_eq!(open.peak(), 4);
    }

    #[test]
    fn closed_admits_once() {
        let mut closed = ClosedSet::with_root(StateId(0));
        assert!(!closed.insert(StateId(0), StateId(3)));
        assert!(closed.insert(StateId(1), StateId(0)));
        assert!(!closed.insert(StateId(1), StateId(2)));
        assert_eq!(closed.parents()[&StateId(1)], StateId(0));
        assert_eq!(closed.len(), 2);
    }

    #[test]
    fn waiters_complete_with_the_evaluation() {
        let mut t = EvalTable::new();
        let g1 = t.open_group(StateId(0), vec![StateId(1)]);
        let g2 = t.open_group(StateId(2), vec![StateId(1), StateId(3)]);
        let a = PendingEval { state: StateId(1), parent: StateId(0), group: g1 };
        let b = PendingEval { state: StateId(1), parent: StateId(2), group: g2 };
        assert_eq!(t.lookup(&a), Lookup::Evaluate);
        assert_eq!(t.lookup(&b), Lookup::Waiting);
        let credits = t.complete(&a, 4);
        assert_eq!(credits.len(), 2);
        assert!(credits[0].complete && credits[0].group == g1);
        assert!(!credits[1].complete && credits[1].parent == StateId(2));
        assert_eq!(t.group(g2).unwrap().remaining, 1);
        let c = PendingEval { state: StateId(3), parent: StateId(2), group: g2 };
        assert_eq!(t.lookup(&c), Lookup::Evaluate);
        assert_eq!(t.complete(&c, 1), vec![Credit { group: g2, parent: StateId(2), complete: true }]);
        assert_eq!(t.h(StateId(1)), Some(4));
    }
}
