//! Seeded cooperative scheduler over the simulated clock.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sequential::gbfs_sequential;
use super::sync::{SimClock, SimFamily};
use super::worker::{Finish, Shared, Step, Worker};
use super::{Algorithm, EngineConfig, EngineError, Scheduler, SearchResult};
use crate::topology::StateSpace;

/// How the scheduler picks the next worker to step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleaving {
    /// The runnable worker whose simulated clock is furthest behind; ties are
    /// broken by the seeded generator. This approximates truly parallel
    /// workers and makes time-based metrics meaningful.
    Timed,
    /// Any runnable worker, uniformly at random. Explores interleavings that
    /// timing alone would rarely produce.
    Arbitrary,
}

/// Runs the engine described by `config` under the deterministic scheduler.
/// Identical `(space, config, seed)` yields an identical event log.
pub fn deterministic_run<S: StateSpace + ?Sized>(
    space: &S,
    config: &EngineConfig,
) -> Result<SearchResult, EngineError> {
    config.validate()?;
    let seed = match config.scheduler {
        Scheduler::Deterministic { seed } => seed,
        other => return Err(EngineError::UnsupportedScheduler(other)),
    };
    if config.algorithm == Algorithm::Gbfs {
        return gbfs_sequential(space, config);
    }

    let constraint = config.effective_constraint();
    let shared: Shared<'_, S, SimFamily> = Shared::new(space, config, &*constraint);
    let cost = config.simulation.section_cost_ns;
    let mut workers: Vec<Worker<SimClock>> = (0..config.workers)
        .map(|i| Worker::new(i as u16, SimClock::new(cost), config.sge))
        .collect();
    workers[0].seed(&shared);
    let start = workers[0].clock.now;
    for w in &mut workers[1..] {
        w.clock.now = start;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut waiting = alloc::vec![false; workers.len()];
    let mut runnable: Vec<usize> = Vec::with_capacity(workers.len());
    let (finish, end) = loop {
        runnable.clear();
        runnable.extend((0..workers.len()).filter(|&i| !waiting[i]));
        if runnable.is_empty() {
            return Err(EngineError::Deadlock);
        }
        if config.simulation.interleaving == Interleaving::Timed {
            let earliest = runnable.iter().map(|&i| workers[i].clock.now).min().unwrap();
            runnable.retain(|&i| workers[i].clock.now == earliest);
        }
        let w = *runnable.choose(&mut rng).unwrap();
        match workers[w].step(&shared) {
            Step::Continue => {}
            Step::Notify => {
                let now = workers[w].clock.now;
                for (i, flag) in waiting.iter_mut().enumerate() {
                    if *flag {
                        *flag = false;
                        workers[i].clock.now = workers[i].clock.now.max(now);
                    }
                }
            }
            Step::Idle => waiting[w] = true,
            Step::Done(Finish::Stopped) => unreachable!("single-threaded driver stops at the first finish"),
            Step::Done(f) => break (f, workers[w].clock.now),
        }
    };
    for w in &mut workers {
        w.close_idle(end);
    }
    shared.into_result(finish, workers, end)
}
