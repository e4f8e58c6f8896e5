//! Reference sequential GBFS, written independently of the worker machinery.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::structures::ClosedSet;
use super::sync::{SimClock, WorkerClock};
use super::trace::{Event, EventKind, SearchTrace};
use super::{EngineConfig, EngineError, FailCause, Outcome, SearchResult, SearchStats};
use crate::topology::{reconstruct_path, StateSpace};

/// Sequential GBFS on the simulated clock: each evaluation costs exactly
/// `config.heuristic_delay_ns`.
pub fn gbfs_sequential<S: StateSpace + ?Sized>(
    space: &S,
    config: &EngineConfig,
) -> Result<SearchResult, EngineError> {
    gbfs_sequential_with(space, config, &mut SimClock::new(0))
}

/// Pops the lowest `(h, insertion order)` entry, stops when a goal is popped,
/// and checks Closed before evaluating each successor.
pub fn gbfs_sequential_with<S: StateSpace + ?Sized, C: WorkerClock + ?Sized>(
    space: &S,
    config: &EngineConfig,
    clock: &mut C,
) -> Result<SearchResult, EngineError> {
    let state_limit = config.state_limit();
    let mut log: Vec<Event> = Vec::new();
    let mut emit = |clock: &C, kind: EventKind| {
        let seq = log.len() as u64;
        log.push(Event { seq, time_ns: clock.now(), worker: 0, kind });
    };
    let mut evaluations = 0u64;
    let mut expansions = 0u64;
    let mut inserted = 0u64;
    let mut next_seq = 0u64;
    let mut peak_open = 0usize;
    let mut open = BinaryHeap::new();
    let init = space.initial();
    let mut closed = ClosedSet::with_root(init);

    emit(clock, EventKind::EvalStart { state: init });
    clock.spend(config.heuristic_delay_ns);
    let h0 = space.heuristic(init);
    evaluations += 1;
    emit(clock, EventKind::EvalEnd { state: init, h: h0 });
    open.push(Reverse((h0, next_seq, init)));
    emit(clock, EventKind::OpenInsert { state: init, parent: None, h: h0, open_seq: next_seq });
    emit(clock, EventKind::BatchInsert { parent: None, count: 1 });
    next_seq += 1;
    peak_open = peak_open.max(open.len());

    let mut succ = Vec::new();
    let mut children = Vec::new();
    let outcome = loop {
        if config.time_limit_ns.is_some_and(|t| clock.now() >= t) {
            break Outcome::LimitExceeded(FailCause::Time);
        }
        let Some(Reverse((h, seq, s))) = open.pop() else {
            break Outcome::Unsolvable;
        };
        emit(clock, EventKind::PopOpen { state: s, h, open_seq: seq });
        if space.is_goal(s) {
            emit(clock, EventKind::GoalFound { state: s });
            break Outcome::Solved(reconstruct_path(closed.parents(), init, s)?);
        }
        expansions += 1;
        succ.clear();
        space.successors(s, &mut succ);
        emit(clock, EventKind::Generate { state: s, count: succ.len() as u32 });
        children.clear();
        let mut full = false;
        for &t in &succ {
            if !closed.insert(t, s) {
                continue;
            }
            if state_limit.is_some_and(|l| closed.len() > l) {
                full = true;
                break;
            }
            emit(clock, EventKind::EvalStart { state: t });
            clock.spend(config.heuristic_delay_ns);
            let ht = space.heuristic(t);
            evaluations += 1;
            emit(clock, EventKind::EvalEnd { state: t, h: ht });
            children.push((t, ht));
        }
        if full {
            break Outcome::LimitExceeded(FailCause::Memory);
        }
        for &(t, ht) in &children {
            open.push(Reverse((ht, next_seq, t)));
            emit(clock, EventKind::OpenInsert { state: t, parent: Some(s), h: ht, open_seq: next_seq });
            next_seq += 1;
        }
        emit(clock, EventKind::BatchInsert { parent: Some(s), count: children.len() as u32 });
        inserted += children.len() as u64;
        peak_open = peak_open.max(open.len());
    };

    Ok(SearchResult {
        outcome,
        stats: SearchStats {
            expansions,
            evaluations,
            wasted_evaluations: evaluations.saturating_sub(1 + inserted),
            elapsed_ns: clock.now(),
            peak_open,
            idle_ns: vec![0],
        },
        trace: SearchTrace { workers: 1, fingerprint: space.fingerprint(), events: log },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{gen_plateau, PlateauLayout};
    use crate::topology::{ExplicitTopology, StateId};

    #[test]
    fn init_goal_has_zero_expansions() {
        let t = ExplicitTopology::new(vec![0], vec![true], vec![vec![]], StateId(0)).unwrap();
        let r = gbfs_sequential(&t, &EngineConfig::gbfs()).unwrap();
        assert_eq!(r.outcome.path().unwrap().states, vec![StateId(0)]);
        assert_eq!(r.stats.expansions, 0);
    }

    #[test]
    fn plateau_walks_the_chain() {
        let t = gen_plateau(4, 3, 1);
        let r = gbfs_sequential(&t, &EngineConfig::gbfs()).unwrap();
        let layout = PlateauLayout::of(4, 3);
        assert_eq!(r.trace.expansion_sequence(), layout.chain[..4].to_vec());
        assert_eq!(r.outcome.path().unwrap().states, layout.chain);
        assert_eq!(r.stats.expansions, 4);
        // 1 + 4 chain states each evaluating 4 successors
        assert_eq!(r.stats.evaluations, 17);
        r.trace.check_invariants().unwrap();
    }

    #[test]
    fn unreachable_goal_is_unsolvable() {
        let t = ExplicitTopology::new(
            vec![1, 2, 0],
            vec![false, false, true],
            vec![vec![StateId(1)], vec![StateId(0)], vec![]],
            StateId(0),
        )
        .unwrap();
        let r = gbfs_sequential(&t, &EngineConfig::gbfs()).unwrap();
        assert_eq!(r.outcome, Outcome::Unsolvable);
        assert_eq!(r.stats.expansions, 2);
    }

    #[test]
    fn limits() {
        let t = gen_plateau(6, 4, 0);
        let cfg = EngineConfig { time_limit_ns: Some(100_000), ..EngineConfig::gbfs() };
        let r = gbfs_sequential(&t, &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::LimitExceeded(FailCause::Time));
        let cfg = EngineConfig { memory_limit_bytes: Some(64 * 5), ..EngineConfig::gbfs() };
        let r = gbfs_sequential(&t, &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::LimitExceeded(FailCause::Memory));
    }
}
