//! The threaded runtime: the core worker state machine on OS threads, with
//! `std::sync::Mutex` sections and a monotonic clock.

use std::sync::{Mutex, MutexGuard, PoisonError};
use std::thread;
use std::time::{Duration, Instant};

use pgbfs_core::engine::sync::{Exclusive, LockFamily, WorkerClock};
use pgbfs_core::engine::worker::{Finish, Shared, Step, Worker};
use pgbfs_core::engine::{
    deterministic_run, gbfs_sequential_with, Algorithm, EngineConfig, EngineError, Scheduler, SearchResult,
};
use pgbfs_core::StateSpace;

impl<T> Exclusive<T> for MutexLock<T> {
    type Guard<'a>
        = MutexGuard<'a, T>
    where
        T: 'a;

    fn new(value: T) -> Self {
        MutexLock(Mutex::new(value))
    }

    fn acquire<C: WorkerClock + ?Sized>(&self, _clock: &mut C) -> MutexGuard<'_, T> {
        self.0.lock().unwrap_or_else(PoisonError::into_inner)
    }

    fn into_inner(self) -> T {
        self.0.into_inner().unwrap_or_else(PoisonError::into_inner)
    }
}

#[derive(Debug, Default)]
pub struct MutexLock<T>(Mutex<T>);

#[derive(Debug, Clone, Copy)]
pub struct MutexFamily;

impl LockFamily for MutexFamily {
    type Lock<T> = MutexLock<T>;
}

/// Wall-clock time since the search started. Heuristic delay is spent as
/// busy work so it occupies a core like a real evaluation would.
#[derive(Debug, Clone, Copy)]
pub struct RealClock {
    start: Instant,
}

impl RealClock {
    pub fn new(start: Instant) -> Self {
        RealClock { start }
    }
}

impl WorkerClock for RealClock {
    fn now(&self) -> u64 {
        self.start.elapsed().as_nanos() as u64
    }
    fn advance_to(&mut self, _t: u64) {}
    fn section_cost(&self) -> u64 {
        0
    }
    fn spend(&mut self, ns: u64) {
        let until = Instant::now() + Duration::from_nanos(ns);
        while Instant::now() < until {
            std::hint::spin_loop();
        }
    }
}

/// Runs `config` on OS threads. Sequential GBFS runs on the calling thread.
pub fn threaded_run<S: StateSpace + Sync + ?Sized>(
    space: &S,
    config: &EngineConfig,
) -> Result<SearchResult, EngineError> {
    config.validate()?;
    let start = Instant::now();
    if config.algorithm == Algorithm::Gbfs {
        return gbfs_sequential_with(space, config, &mut RealClock::new(start));
    }
    let constraint = config.effective_constraint();
    let shared: Shared<'_, S, MutexFamily> = Shared::new(space, config, &*constraint);
    let mut workers: Vec<Worker<RealClock>> = (0..config.workers)
        .map(|i| Worker::new(i as u16, RealClock::new(start), config.sge))
        .collect();
    workers[0].seed(&shared);

    let finished: Vec<(Worker<RealClock>, Finish, u64)> = thread::scope(|scope| {
        let handles: Vec<_> = workers
            .into_iter()
            .map(|mut w| {
                let shared = &shared;
                scope.spawn(move || loop {
                    match w.step(shared) {
                        Step::Continue | Step::Notify => {}
                        Step::Idle => thread::yield_now(),
                        Step::Done(f) => {
                            let t = w.clock.now();
                            return (w, f, t);
                        }
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
    });

    let (finish, end) = finished
        .iter()
        .filter(|(_, f, _)| *f != Finish::Stopped)
        .min_by_key(|(_, _, t)| *t)
        .map(|(_, f, t)| (*f, *t))
        .expect("some worker decides the outcome");
    let workers = finished
        .into_iter()
        .map(|(mut w, _, _)| {
            w.close_idle(end);
            w
        })
        .collect();
    shared.into_result(finish, workers, end)
}

/// Any engine under either scheduler.
pub fn solve<S: StateSpace + Sync + ?Sized>(space: &S, config: &EngineConfig) -> Result<SearchResult, EngineError> {
    match config.scheduler {
        Scheduler::Real => threaded_run(space, config),
        Scheduler::Deterministic { .. } => deterministic_run(space, config),
    }
}

/// The template without SGE.
pub fn cpgbfs_run<S: StateSpace + Sync + ?Sized>(space: &S, config: &EngineConfig) -> Result<SearchResult, EngineError> {
    if config.sge {
        return Err(EngineError::InvalidConfig("cpgbfs_run requires sge = false"));
    }
    solve(space, config)
}

/// The template with separate generation and evaluation.
pub fn cpgbfs_sge_run<S: StateSpace + Sync + ?Sized>(space: &S, config: &EngineConfig) -> Result<SearchResult, EngineError> {
    if !config.sge {
        return Err(EngineError::InvalidConfig("cpgbfs_sge_run requires sge = true"));
    }
    solve(space, config)
}
