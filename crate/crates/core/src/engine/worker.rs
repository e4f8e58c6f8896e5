//! The worker state machine shared by the deterministic and threaded drivers.
//!
//! A worker advances one [`Worker::step`] at a time. Every step holds at most
//! one group of exclusive sections or performs one heuristic evaluation, so
//! step boundaries are the scheduler's yield points.
//!
//! Lock order is Open, Closed, evaluation table, registry, Unevaluated.

use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering::SeqCst};

use super::constraint::{Candidate, ExpansionConstraint, InflightEntry, InflightRegistry};
use super::structures::{ClosedSet, Credit, EvalTable, GroupId, Lookup, OpenEntry, OpenList, PendingEval, UnevaluatedQueue};
use super::sync::{Exclusive, LockFamily, WorkerClock};
use super::trace::{Event, EventKind, SearchTrace};
use super::{EngineConfig, EngineError, FailCause, Outcome, SearchResult, SearchStats};
use crate::topology::{reconstruct_path, HValue, StateId, StateSpace};

/// State shared by all workers of one search.
pub struct Shared<'a, S: ?Sized, L: LockFamily> {
    pub space: &'a S,
    pub sge: bool,
    pub constraint: &'a dyn ExpansionConstraint,
    pub delay_ns: u64,
    pub time_limit_ns: Option<u64>,
    pub state_limit: Option<usize>,
    pub open: L::Lock<OpenList>,
    pub closed: L::Lock<ClosedSet>,
    pub evals: L::Lock<EvalTable>,
    pub registry: L::Lock<InflightRegistry>,
    pub unevaluated: L::Lock<UnevaluatedQueue>,
    /// Busy workers plus queued Unevaluated entries.
    pub outstanding: AtomicUsize,
    pub stop: AtomicBool,
    /// Bumped by every step that may unblock an idle worker.
    version: AtomicU64,
    event_seq: AtomicU64,
    expansions: AtomicU64,
    evaluations: AtomicU64,
    inserted: AtomicU64,
}

impl<S: ?Sized, L: LockFamily> core::fmt::Debug for Shared<'_, S, L> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Shared")
            .field("sge", &self.sge)
            .field("outstanding", &self.outstanding)
            .field("stop", &self.stop)
            .finish_non_exhaustive()
    }
}

impl<'a, S: StateSpace + ?Sized, L: LockFamily> Shared<'a, S, L> {
    pub fn new(space: &'a S, config: &EngineConfig, constraint: &'a dyn ExpansionConstraint) -> Self {
        Shared {
            space,
            sge: config.sge,
            constraint,
            delay_ns: config.heuristic_delay_ns,
            time_limit_ns: config.time_limit_ns,
            state_limit: config.state_limit(),
            open: L::Lock::new(OpenList::new()),
            closed: L::Lock::new(ClosedSet::with_root(space.initial())),
            evals: L::Lock::new(EvalTable::new()),
            registry: L::Lock::new(InflightRegistry::new()),
            unevaluated: L::Lock::new(UnevaluatedQueue::new()),
            outstanding: AtomicUsize::new(0),
            stop: AtomicBool::new(false),
            version: AtomicU64::new(0),
            event_seq: AtomicU64::new(0),
            expansions: AtomicU64::new(0),
            evaluations: AtomicU64::new(0),
            inserted: AtomicU64::new(0),
        }
    }

    /// Builds the result once every worker has stopped.
    pub fn into_result<C>(
        self,
        finish: Finish,
        workers: Vec<Worker<C>>,
        elapsed_ns: u64,
    ) -> Result<SearchResult, EngineError> {
        let initial = self.space.initial();
        let fingerprint = self.space.fingerprint();
        let peak_open = self.open.into_inner().peak();
        let closed = self.closed.into_inner();
        let outcome = match finish {
            Finish::Goal(g) => Outcome::Solved(reconstruct_path(closed.parents(), initial, g)?),
            Finish::Unsolvable => Outcome::Unsolvable,
            Finish::Limit(cause) => Outcome::LimitExceeded(cause),
            Finish::Stopped => unreachable!("a stopped worker never decides the outcome"),
        };
        let evaluations = self.evaluations.load(SeqCst);
        let inserted = self.inserted.load(SeqCst);
        let idle_ns = workers.iter().map(|w| w.idle_ns).collect();
        let logs = workers.into_iter().map(|w| w.log).collect::<Vec<_>>();
        let trace = SearchTrace::from_logs(logs.len() as u16, fingerprint, logs);
        Ok(SearchResult {
            outcome,
            stats: SearchStats {
                expansions: self.expansions.load(SeqCst),
                evaluations,
                wasted_evaluations: evaluations.saturating_sub(1 + inserted),
                elapsed_ns,
                peak_open,
                idle_ns,
            },
            trace,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Finish {
    Goal(StateId),
    Unsolvable,
    Limit(FailCause),
    /// Another worker decided the outcome.
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Continue,
    /// Continue, and the shared structures changed in a way that may unblock
    /// idle workers.
    Notify,
    /// Nothing to do until another worker makes progress.
    Idle,
    Done(Finish),
}

#[derive(Debug)]
struct Expansion {
    parent: StateId,
    successors: Vec<StateId>,
    next: usize,
    children: Vec<(StateId, HValue)>,
}

#[derive(Debug)]
enum Phase {
    Poll,
    Select,
    Generate(OpenEntry),
    Claim,
    EvalChild(StateId),
    Enqueue(StateId),
    Lookup(PendingEval),
    EvalItem(PendingEval),
    Record(PendingEval, HValue),
    FinishGroups(Vec<GroupId>),
}

#[derive(Debug)]
pub struct Worker<C> {
    pub id: u16,
    pub clock: C,
    pub idle_ns: u64,
    phase: Phase,
    log: Vec<Event>,
    idle_since: Option<u64>,
    /// An empty poll happened while idle and is reported on wake-up.
    quiet_poll: bool,
    /// `Shared::version` at this worker's last poll.
    polled_version: u64,
    buf: Vec<StateId>,
    expansion: Option<Expansion>,
}

impl<C: WorkerClock> Worker<C> {
    pub fn new(id: u16, clock: C, sge: bool) -> Self {
        Worker {
            id,
            clock,
            idle_ns: 0,
            phase: if sge { Phase::Poll } else { Phase::Select },
            log: Vec::new(),
            idle_since: None,
            quiet_poll: false,
            polled_version: 0,
            buf: Vec::new(),
            expansion: None,
        }
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    fn emit<S: ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, kind: EventKind) {
        let seq = shared.event_seq.fetch_add(1, SeqCst);
        self.log.push(Event { seq, time_ns: self.clock.now(), worker: self.id, kind });
    }

    fn evaluate<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, s: StateId) -> HValue {
        self.emit(shared, EventKind::EvalStart { state: s });
        self.clock.spend(shared.delay_ns);
        let h = shared.space.heuristic(s);
        shared.evaluations.fetch_add(1, SeqCst);
        self.emit(shared, EventKind::EvalEnd { state: s, h });
        h
    }

    /// Evaluates the initial state and puts it into Open. Run once, by one
    /// worker, before any worker steps.
    pub fn seed<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) {
        let init = shared.space.initial();
        let h = self.evaluate(shared, init);
        let mut open = shared.open.acquire(&mut self.clock);
        let seq = open.push(init, h);
        self.emit(shared, EventKind::OpenInsert { state: init, parent: None, h, open_seq: seq });
        self.emit(shared, EventKind::BatchInsert { parent: None, count: 1 });
        drop(open);
        shared.evals.acquire(&mut self.clock).set_known(init, h);
    }

    fn go_idle<S: ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) -> Step {
        if shared.sge {
            self.phase = Phase::Poll;
            // Work may have been queued between the poll and the selection.
            if shared.version.load(SeqCst) != self.polled_version {
                return Step::Continue;
            }
        }
        if self.idle_since.is_none() {
            self.emit(shared, EventKind::IdleStart);
            self.idle_since = Some(self.clock.now());
        }
        Step::Idle
    }

    fn wake<S: ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) {
        if let Some(since) = self.idle_since.take() {
            self.idle_ns += self.clock.now().saturating_sub(since);
            self.emit(shared, EventKind::IdleEnd);
        }
    }

    /// Closes an idle interval left open when the search ended.
    pub fn close_idle(&mut self, end: u64) {
        if let Some(since) = self.idle_since.take() {
            self.idle_ns += end.saturating_sub(since);
        }
    }

    fn halt<S: ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, finish: Finish) -> Step {
        shared.stop.store(true, SeqCst);
        Step::Done(finish)
    }

    fn over_limit<S: ?Sized, L: LockFamily>(shared: &Shared<'_, S, L>, admitted: usize) -> bool {
        shared.state_limit.is_some_and(|limit| admitted > limit)
    }

    pub fn step<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) -> Step {
        if shared.stop.load(SeqCst) {
            return Step::Done(Finish::Stopped);
        }
        if shared.time_limit_ns.is_some_and(|t| self.clock.now() >= t) {
            return self.halt(shared, Finish::Limit(FailCause::Time));
        }
        let step = match core::mem::replace(&mut self.phase, Phase::Select) {
            Phase::Poll => self.poll(shared),
            Phase::Select => self.select(shared),
            Phase::Generate(top) => self.generate(shared, top),
            Phase::Claim => self.claim(shared),
            Phase::EvalChild(child) => {
                let h = self.evaluate(shared, child);
                self.expansion.as_mut().expect("expansion in progress").children.push((child, h));
                self.phase = Phase::Claim;
                Step::Continue
            }
            Phase::Enqueue(parent) => self.enqueue(shared, parent),
            Phase::Lookup(item) => self.lookup(shared, item),
            Phase::EvalItem(item) => {
                let h = self.evaluate(shared, item.state);
                self.phase = Phase::Record(item, h);
                Step::Continue
            }
            Phase::Record(item, h) => self.record(shared, item, h),
            Phase::FinishGroups(groups) => self.finish_groups(shared, groups),
        };
        if step == Step::Notify {
            shared.version.fetch_add(1, SeqCst);
        }
        step
    }

    fn poll<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) -> Step {
        self.polled_version = shared.version.load(SeqCst);
        let item = shared.unevaluated.acquire(&mut self.clock).pop_front();
        match item {
            Some(item) => {
                self.wake(shared);
                self.quiet_poll = false;
                self.emit(shared, EventKind::Dequeue { state: item.state, parent: item.parent });
                self.phase = Phase::Lookup(item);
            }
            None => {
                if self.idle_since.is_none() {
                    self.emit(shared, EventKind::PollEmpty);
                } else {
                    self.quiet_poll = true;
                }
                self.phase = Phase::Select;
            }
        }
        Step::Continue
    }

    fn select<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) -> Step {
        let mut open = shared.open.acquire(&mut self.clock);
        let Some(top) = open.peek() else {
            if shared.outstanding.load(SeqCst) == 0 {
                drop(open);
                return self.halt(shared, Finish::Unsolvable);
            }
            drop(open);
            return self.go_idle(shared);
        };
        let mut registry = shared.registry.acquire(&mut self.clock);
        let candidate = Candidate { state: top.state, h: top.h };
        if !registry.is_empty() && !shared.constraint.satisfies(candidate, &registry) {
            drop(registry);
            drop(open);
            return self.go_idle(shared);
        }
        open.pop();
        shared.outstanding.fetch_add(1, SeqCst);
        registry.insert(InflightEntry::new(top.state, top.h));
        shared.constraint.on_expansion_start(top.state);
        drop(registry);
        self.wake(shared);
        if core::mem::take(&mut self.quiet_poll) {
            self.emit(shared, EventKind::PollEmpty);
        }
        self.emit(shared, EventKind::PopOpen { state: top.state, h: top.h, open_seq: top.seq });
        drop(open);
        self.phase = Phase::Generate(top);
        Step::Continue
    }

    fn generate<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, top: OpenEntry) -> Step {
        if shared.space.is_goal(top.state) {
            self.emit(shared, EventKind::GoalFound { state: top.state });
            return self.halt(shared, Finish::Goal(top.state));
        }
        shared.expansions.fetch_add(1, SeqCst);
        let mut successors = core::mem::take(&mut self.buf);
        successors.clear();
        shared.space.successors(top.state, &mut successors);
        self.emit(shared, EventKind::Generate { state: top.state, count: successors.len() as u32 });
        if shared.sge {
            self.buf = successors;
            self.phase = Phase::Enqueue(top.state);
        } else {
            self.expansion = Some(Expansion { parent: top.state, successors, next: 0, children: Vec::new() });
            self.phase = Phase::Claim;
        }
        Step::Continue
    }

    fn claim<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) -> Step {
        let exp = self.expansion.as_mut().expect("expansion in progress");
        if exp.next == exp.successors.len() {
            return self.insert(shared);
        }
        let child = exp.successors[exp.next];
        exp.next += 1;
        let parent = exp.parent;
        let mut closed = shared.closed.acquire(&mut self.clock);
        let admitted = closed.insert(child, parent);
        let full = Self::over_limit(shared, closed.len());
        drop(closed);
        if full {
            return self.halt(shared, Finish::Limit(FailCause::Memory));
        }
        self.phase = if admitted { Phase::EvalChild(child) } else { Phase::Claim };
        Step::Continue
    }

    fn insert<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>) -> Step {
        let exp = self.expansion.take().expect("expansion in progress");
        let mut open = shared.open.acquire(&mut self.clock);
        let mut registry = shared.registry.acquire(&mut self.clock);
        for &(state, h) in &exp.children {
            let seq = open.push(state, h);
            self.emit(shared, EventKind::OpenInsert { state, parent: Some(exp.parent), h, open_seq: seq });
        }
        self.emit(shared, EventKind::BatchInsert { parent: Some(exp.parent), count: exp.children.len() as u32 });
        shared.inserted.fetch_add(exp.children.len() as u64, SeqCst);
        registry.remove(exp.parent);
        shared.constraint.on_expansion_finish(exp.parent);
        shared.outstanding.fetch_sub(1, SeqCst);
        drop(registry);
        drop(open);
        self.buf = exp.successors;
        self.phase = Phase::Select;
        Step::Notify
    }

    fn enqueue<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, parent: StateId) -> Step {
        self.phase = Phase::Poll;
        if self.buf.is_empty() {
            let open = shared.open.acquire(&mut self.clock);
            let mut registry = shared.registry.acquire(&mut self.clock);
            self.emit(shared, EventKind::BatchInsert { parent: Some(parent), count: 0 });
            registry.remove(parent);
            shared.constraint.on_expansion_finish(parent);
            shared.outstanding.fetch_sub(1, SeqCst);
            drop(registry);
            drop(open);
            return Step::Notify;
        }
        let n = self.buf.len();
        let mut evals = shared.evals.acquire(&mut self.clock);
        let group = evals.open_group(parent, self.buf.clone());
        drop(evals);
        if let Some(e) = shared.registry.acquire(&mut self.clock).get_mut(parent) {
            e.generated = true;
            e.awaiting = n;
        }
        let mut queue = shared.unevaluated.acquire(&mut self.clock);
        queue.extend(self.buf.iter().map(|&state| PendingEval { state, parent, group }));
        shared.outstanding.fetch_add(n - 1, SeqCst);
        drop(queue);
        Step::Notify
    }

    fn lookup<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, item: PendingEval) -> Step {
        let mut evals = shared.evals.acquire(&mut self.clock);
        match evals.lookup(&item) {
            Lookup::Known { h, credit } => {
                apply_credit(&mut shared.registry.acquire(&mut self.clock), credit, h);
                drop(evals);
                if credit.complete {
                    self.phase = Phase::FinishGroups(vec![credit.group]);
                } else {
                    shared.outstanding.fetch_sub(1, SeqCst);
                    self.phase = Phase::Poll;
                }
            }
            Lookup::Waiting => {
                drop(evals);
                shared.outstanding.fetch_sub(1, SeqCst);
                self.phase = Phase::Poll;
            }
            Lookup::Evaluate => {
                drop(evals);
                self.phase = Phase::EvalItem(item);
            }
        }
        Step::Continue
    }

    fn record<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, item: PendingEval, h: HValue) -> Step {
        let mut evals = shared.evals.acquire(&mut self.clock);
        let credits = evals.complete(&item, h);
        let mut registry = shared.registry.acquire(&mut self.clock);
        for &c in &credits {
            apply_credit(&mut registry, c, h);
        }
        drop(registry);
        drop(evals);
        let complete: Vec<GroupId> = credits.iter().filter(|c| c.complete).map(|c| c.group).collect();
        if complete.is_empty() {
            shared.outstanding.fetch_sub(1, SeqCst);
            self.phase = Phase::Poll;
        } else {
            self.phase = Phase::FinishGroups(complete);
        }
        Step::Continue
    }

    fn finish_groups<S: StateSpace + ?Sized, L: LockFamily>(&mut self, shared: &Shared<'_, S, L>, groups: Vec<GroupId>) -> Step {
        let mut open = shared.open.acquire(&mut self.clock);
        let mut closed = shared.closed.acquire(&mut self.clock);
        let mut evals = shared.evals.acquire(&mut self.clock);
        let mut registry = shared.registry.acquire(&mut self.clock);
        for g in groups {
            let group = evals.take_group(g).expect("completed group is open");
            let mut count = 0u32;
            for &m in &group.members {
                if closed.insert(m, group.parent) {
                    let h = evals.h(m).expect("group member was evaluated");
                    let seq = open.push(m, h);
                    self.emit(shared, EventKind::OpenInsert { state: m, parent: Some(group.parent), h, open_seq: seq });
                    count += 1;
                }
            }
            self.emit(shared, EventKind::BatchInsert { parent: Some(group.parent), count });
            shared.inserted.fetch_add(count as u64, SeqCst);
            registry.remove(group.parent);
            shared.constraint.on_expansion_finish(group.parent);
        }
        let full = Self::over_limit(shared, closed.len());
        shared.outstanding.fetch_sub(1, SeqCst);
        drop(registry);
        drop(evals);
        drop(closed);
        drop(open);
        self.phase = Phase::Poll;
        if full {
            return self.halt(shared, Finish::Limit(FailCause::Memory));
        }
        Step::Notify
    }
}

fn apply_credit(registry: &mut InflightRegistry, credit: Credit, h: HValue) {
    if let Some(e) = registry.get_mut(credit.parent) {
        e.awaiting -= 1;
        e.record_h(h);
    }
}
