//! Search traces: the event log every engine emits, plus the analyses and
//! invariant checks run over it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rustc_hash::FxBuildHasher;

use crate::topology::{HValue, StateId};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "event", rename_all = "kebab-case"))]
pub enum EventKind {
    /// `open_seq` is the insertion sequence number of the popped entry.
    PopOpen { state: StateId, h: HValue, open_seq: u64 },
    /// The worker found the Unevaluated queue empty right before selecting.
    PollEmpty,
    Dequeue { state: StateId, parent: StateId },
    Generate { state: StateId, count: u32 },
    EvalStart { state: StateId },
    EvalEnd { state: StateId, h: HValue },
    OpenInsert { state: StateId, parent: Option<StateId>, h: HValue, open_seq: u64 },
    /// Closes a run of `count` `OpenInsert` events from the same worker.
    BatchInsert { parent: Option<StateId>, count: u32 },
    IdleStart,
    IdleEnd,
    GoalFound { state: StateId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    /// Global order in which events were recorded.
    pub seq: u64,
    pub time_ns: u64,
    pub worker: u16,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchTrace {
    pub workers: u16,
    /// Fingerprint of the searched topology, when it is explicit.
    pub fingerprint: Option<u64>,
    /// Sorted by `seq`.
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace invariant `{rule}` violated at event {seq}: {detail}")]
pub struct TraceViolation {
    pub rule: &'static str,
    pub seq: u64,
    pub detail: String,
}

impl TraceViolation {
    fn new(rule: &'static str, seq: u64, detail: String) -> Self {
        TraceViolation { rule, seq, detail }
    }
}

impl SearchTrace {
    /// Merges per-worker logs into one trace ordered by `seq`.
    pub fn from_logs(workers: u16, fingerprint: Option<u64>, logs: Vec<Vec<Event>>) -> Self {
        let mut events: Vec<Event> = logs.into_iter().flatten().collect();
        events.sort_by_key(|e| e.seq);
        SearchTrace { workers, fingerprint, events }
    }

    /// Every state removed from Open, in pop order (goals included).
    pub fn selected(&self) -> Vec<StateId> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::PopOpen { state, .. } => Some(state),
                _ => None,
            })
            .collect()
    }

    /// Expanded (popped non-goal) states in expansion order.
    pub fn expansion_sequence(&self) -> Vec<StateId> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Generate { state, .. } => Some(state),
                _ => None,
            })
            .collect()
    }

    /// Evaluated states in the order evaluation finished.
    pub fn evaluation_sequence(&self) -> Vec<StateId> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::EvalEnd { state, .. } => Some(state),
                _ => None,
            })
            .collect()
    }

    /// Largest number of evaluation intervals overlapping in time. Intervals
    /// are half-open, so back-to-back evaluations do not overlap.
    pub fn peak_concurrent_evaluations(&self) -> usize {
        let mut points: Vec<(u64, i32)> = Vec::new();
        let mut open: BTreeMap<u16, u64> = BTreeMap::new();
        for e in &self.events {
            match e.kind {
                EventKind::EvalStart { .. } => {
                    open.insert(e.worker, e.time_ns);
                }
                EventKind::EvalEnd { .. } => {
                    if let Some(start) = open.remove(&e.worker) {
                        if e.time_ns > start {
                            points.push((start, 1));
                            points.push((e.time_ns, -1));
                        }
                    }
                }
                _ => {}
            }
        }
        // Ends sort before starts at the same instant.
        points.sort();
        let (mut cur, mut peak) = (0i32, 0i32);
        for (_, d) in points {
            cur += d;
            peak = peak.max(cur);
        }
        peak as usize
    }

    /// Total idle time per worker. An idle interval still open at the end of
    /// the trace is closed at the last event's time.
    pub fn idle_ns(&self) -> Vec<u64> {
        let mut idle = vec![0u64; self.workers as usize];
        let mut since: Vec<Option<u64>> = vec![None; self.workers as usize];
        let end = self.events.iter().map(|e| e.time_ns).max().unwrap_or(0);
        for e in &self.events {
            let w = e.worker as usize;
            if w >= idle.len() {
                continue;
            }
            match e.kind {
                EventKind::IdleStart => since[w] = Some(e.time_ns),
                EventKind::IdleEnd => {
                    if let Some(t) = since[w].take() {
                        idle[w] += e.time_ns.saturating_sub(t);
                    }
                }
                _ => {}
            }
        }
        for (w, s) in since.into_iter().enumerate() {
            if let Some(t) = s {
                idle[w] += end.saturating_sub(t);
            }
        }
        idle
    }

    /// Runs every trace invariant except [`Self::check_precedence`], which only
    /// applies to SGE runs.
    pub fn check_invariants(&self) -> Result<(), TraceViolation> {
        self.check_worker_time_order()?;
        self.check_eval_pairs()?;
        self.check_closed_uniqueness()?;
        self.check_pop_order()?;
        self.check_batch_atomicity()
    }

    pub fn check_worker_time_order(&self) -> Result<(), TraceViolation> {
        let mut last: BTreeMap<u16, u64> = BTreeMap::new();
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 && self.events[i - 1].seq >= e.seq {
                return Err(TraceViolation::new("seq-order", e.seq, "sequence numbers not increasing".into()));
            }
            let prev = last.insert(e.worker, e.time_ns).unwrap_or(0);
            if e.time_ns < prev {
                return Err(TraceViolation::new(
                    "worker-time-order",
                    e.seq,
                    format!("worker {} went back in time ({} < {prev})", e.worker, e.time_ns),
                ));
            }
        }
        Ok(())
    }

    /// Every eval-end closes an eval-start of the same state on the same
    /// worker, with no nesting.
    pub fn check_eval_pairs(&self) -> Result<(), TraceViolation> {
        let mut open: BTreeMap<u16, StateId> = BTreeMap::new();
        for e in &self.events {
            match e.kind {
                EventKind::EvalStart { state } => {
                    if let Some(prev) = open.insert(e.worker, state) {
                        return Err(TraceViolation::new(
                            "eval-pairs",
                            e.seq,
                            format!("worker {} started {state} while evaluating {prev}", e.worker),
                        ));
                    }
                }
                EventKind::EvalEnd { state, .. }
                    if open.remove(&e.worker) != Some(state) => {
                        return Err(TraceViolation::new(
                            "eval-pairs",
                            e.seq,
                            format!("eval-end of {state} without matching eval-start"),
                        ));
                    }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn check_closed_uniqueness(&self) -> Result<(), TraceViolation> {
        let mut seen: hashbrown::HashSet<StateId, FxBuildHasher> = Default::default();
        for e in &self.events {
            if let EventKind::EvalStart { state } = e.kind {
                if !seen.insert(state) {
                    return Err(TraceViolation::new(
                        "closed-uniqueness",
                        e.seq,
                        format!("state {state} evaluated twice"),
                    ));
                }
            }
        }
        let mut inserted: hashbrown::HashSet<StateId, FxBuildHasher> = Default::default();
        for e in &self.events {
            if let EventKind::OpenInsert { state, .. } = e.kind {
                if !inserted.insert(state) {
                    return Err(TraceViolation::new(
                        "closed-uniqueness",
                        e.seq,
                        format!("state {state} inserted into Open twice"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Between two pops with no insertion in between, `(h, open_seq)` must not
    /// decrease.
    pub fn check_pop_order(&self) -> Result<(), TraceViolation> {
        let mut last: Option<(HValue, u64)> = None;
        for e in &self.events {
            match e.kind {
                EventKind::OpenInsert { .. } => last = None,
                EventKind::PopOpen { h, open_seq, state } => {
                    if let Some(prev) = last {
                        if (h, open_seq) < prev {
                            return Err(TraceViolation::new(
                                "pop-order",
                                e.seq,
                                format!("popped {state} with (h, seq) = ({h}, {open_seq}) after {prev:?}"),
                            ));
                        }
                    }
                    last = Some((h, open_seq));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// No other worker pops from Open between the first insertion of a batch
    /// and the event that closes it.
    pub fn check_batch_atomicity(&self) -> Result<(), TraceViolation> {
        let mut pending: BTreeMap<u16, (u64, u32)> = BTreeMap::new();
        for e in &self.events {
            match e.kind {
                EventKind::OpenInsert { .. } => {
                    let entry = pending.entry(e.worker).or_insert((e.seq, 0));
                    entry.1 += 1;
                }
                EventKind::BatchInsert { count, .. } => {
                    let got = pending.remove(&e.worker).map_or(0, |p| p.1);
                    if got != count {
                        return Err(TraceViolation::new(
                            "batch-atomicity",
                            e.seq,
                            format!("batch of {count} closed after {got} insertions"),
                        ));
                    }
                }
                EventKind::PopOpen { .. } => {
                    if let Some((&w, _)) = pending.iter().find(|(&w, _)| w != e.worker) {
                        return Err(TraceViolation::new(
                            "batch-atomicity",
                            e.seq,
                            format!("worker {} popped during worker {w}'s batch insertion", e.worker),
                        ));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// SGE only: the poll right before each pop observed an empty queue.
    pub fn check_precedence(&self) -> Result<(), TraceViolation> {
        let mut last_poll_empty: BTreeMap<u16, bool> = BTreeMap::new();
        for e in &self.events {
            match e.kind {
                EventKind::PollEmpty => {
                    last_poll_empty.insert(e.worker, true);
                }
                EventKind::Dequeue { .. } => {
                    last_poll_empty.insert(e.worker, false);
                }
                EventKind::PopOpen { state, .. }
                    if last_poll_empty.insert(e.worker, false) != Some(true) => {
                        return Err(TraceViolation::new(
                            "precedence",
                            e.seq,
                            format!("worker {} popped {state} without an empty poll", e.worker),
                        ));
                    }
                _ => {}
            }
        }
        Ok(())
    }
}
