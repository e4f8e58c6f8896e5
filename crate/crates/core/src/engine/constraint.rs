//! Expansion constraints and the in-flight registry they inspect.

use alloc::vec::Vec;
use core::fmt;

use crate::topology::{HValue, StateId};

/// The state at the top of Open that a worker wants to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub state: StateId,
    pub h: HValue,
}

/// A state that was popped for expansion and whose successors have not yet
/// been inserted into Open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflightEntry {
    pub state: StateId,
    pub h: HValue,
    /// False until the successor list is known.
    pub generated: bool,
    /// Successors admitted for evaluation but without a heuristic value yet.
    pub awaiting: usize,
    /// Smallest heuristic value among successors evaluated so far.
    pub evaluated_min_h: Option<HValue>,
}

impl InflightEntry {
    pub fn new(state: StateId, h: HValue) -> Self {
        InflightEntry { state, h, generated: false, awaiting: 0, evaluated_min_h: None }
    }

    /// Every successor that will be inserted has a known heuristic value.
    pub fn settled(&self) -> bool {
        self.generated && self.awaiting == 0
    }

    pub fn record_h(&mut self, h: HValue) {
        self.evaluated_min_h = Some(self.evaluated_min_h.map_or(h, |m| m.min(h)));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InflightRegistry {
    entries: Vec<InflightEntry>,
}

impl InflightRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &InflightEntry> {
        self.entries.iter()
    }

    pub fn insert(&mut self, entry: InflightEntry) {
        self.entries.push(entry);
    }

    pub fn get_mut(&mut self, s: StateId) -> Option<&mut InflightEntry> {
        self.entries.iter_mut().find(|e| e.state == s)
    }

    pub fn remove(&mut self, s: StateId) -> Option<InflightEntry> {
        let i = self.entries.iter().position(|e| e.state == s)?;
        Some(self.entries.swap_remove(i))
    }
}

/// The pluggable `satisfies` gate on expanding the top of Open.
///
/// The engine only consults `satisfies` when the registry is non-empty. Both
/// `satisfies` and the callbacks run inside the exclusive section that guards
/// the registry, with Open locked as well.
pub trait ExpansionConstraint: Send + Sync {
    fn name(&self) -> &str;
    fn satisfies(&self, candidate: Candidate, registry: &InflightRegistry) -> bool;
    fn on_expansion_start(&self, _s: StateId) {}
    fn on_expansion_finish(&self, _s: StateId) {}
}

impl fmt::Debug for dyn ExpansionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<constraint {}>", self.name())
    }
}

/// Always true: the engine behaves as KPGBFS.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoConstraint;

impl ExpansionConstraint for NoConstraint {
    fn name(&self) -> &str {
        "none"
    }
    fn satisfies(&self, _: Candidate, _: &InflightRegistry) -> bool {
        true
    }
}

/// The candidate may be expanded when, for every in-flight state `p`,
/// `h(candidate) <= h(p)` and `h(candidate)` is no larger than any successor
/// of `p` that is still waiting to enter Open. Successors whose value is not
/// known yet block the candidate; once `p` is settled the second condition
/// becomes `h(candidate) <= evaluated_min_h(p)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InflightMinH;

impl ExpansionConstraint for InflightMinH {
    fn name(&self) -> &str {
        "inflight-minh"
    }

    fn satisfies(&self, c: Candidate, registry: &InflightRegistry) -> bool {
        registry.iter().all(|p| {
            c.h <= p.h && p.settled() && p.evaluated_min_h.is_none_or(|m| c.h <= m)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settled(state: u32, h: HValue) -> InflightEntry {
        InflightEntry { generated: true, ..InflightEntry::new(StateId(state), h) }
    }

    #[test]
    fn none_is_always_true() {
        let mut reg = InflightRegistry::new();
        let c = Candidate { state: StateId(9), h: 7 };
        assert!(NoConstraint.satisfies(c, &reg));
        reg.insert(InflightEntry::new(StateId(1), 7));
        reg.insert(InflightEntry::new(StateId(2), 1));
        assert!(NoConstraint.satisfies(c, &reg));
        assert!(NoConstraint.satisfies(Candidate { state: StateId(9), h: 1 }, &reg));
    }

    #[test]
    fn minh_compares_against_inflight_values() {
        let mut reg = InflightRegistry::new();
        assert!(InflightMinH.satisfies(Candidate { state: StateId(0), h: 100 }, &reg));
        reg.insert(settled(1, 3));
        reg.insert(settled(2, 5));
        assert!(InflightMinH.satisfies(Candidate { state: StateId(0), h: 3 }, &reg));
        assert!(!InflightMinH.satisfies(Candidate { state: StateId(0), h: 4 }, &reg));
    }

    #[test]
    fn minh_waits_for_pending_successors() {
        let mut reg = InflightRegistry::new();
        reg.insert(InflightEntry::new(StateId(1), 5));
        let c = Candidate { state: StateId(0), h: 2 };
        assert!(!InflightMinH.satisfies(c, &reg));
        let e = reg.get_mut(StateId(1)).unwrap();
        e.generated = true;
        e.awaiting = 1;
        assert!(!InflightMinH.satisfies(c, &reg));
        let e = reg.get_mut(StateId(1)).unwrap();
        e.awaiting = 0;
        e.record_h(1);
        assert!(!InflightMinH.satisfies(c, &reg));
        assert!(InflightMinH.satisfies(Candidate { state: StateId(0), h: 1 }, &reg));
        assert_eq!(reg.remove(StateId(1)).map(|e| e.state), Some(StateId(1)));
        assert!(reg.is_empty());
    }
}
