//! Exclusive-access sections and worker clocks.
//!
//! The engine is written once against [`LockFamily`] and [`WorkerClock`]. The
//! deterministic scheduler plugs in [`SimLock`] and [`SimClock`], which charge
//! simulated time and serialize sections on a virtual timeline; the threaded
//! runtime in the `pgbfs` crate plugs in OS mutexes and a monotonic clock.

use core::cell::{Cell, RefCell, RefMut};
use core::ops::DerefMut;

/// Per-worker time source, in nanoseconds since the search started.
pub trait WorkerClock {
    fn now(&self) -> u64;
    /// Moves the clock forward to `t` if it is behind. Real clocks ignore this.
    fn advance_to(&mut self, t: u64);
    /// Cost charged for holding one exclusive section.
    fn section_cost(&self) -> u64;
    /// Spends `ns` nanoseconds of heuristic computation.
    fn spend(&mut self, ns: u64);
}

pub trait Exclusive<T> {
    type Guard<'a>: DerefMut<Target = T>
    where
        Self: 'a,
        T: 'a;

    fn new(value: T) -> Self;
    fn acquire<C: WorkerClock + ?Sized>(&self, clock: &mut C) -> Self::Guard<'_>;
    fn into_inner(self) -> T;
}

pub trait LockFamily {
    type Lock<T>: Exclusive<T>;
}

/// Single-threaded lock for the deterministic scheduler. Each acquisition
/// starts no earlier than the previous holder's release on the simulated
/// timeline and lasts [`WorkerClock::section_cost`].
#[derive(Debug)]
pub struct SimLock<T> {
    value: RefCell<T>,
    free_at: Cell<u64>,
}

impl<T> Exclusive<T> for SimLock<T> {
    type Guard<'a>
        = RefMut<'a, T>
    where
        T: 'a;

    fn new(value: T) -> Self {
        SimLock { value: RefCell::new(value), free_at: Cell::new(0) }
    }

    fn acquire<C: WorkerClock + ?Sized>(&self, clock: &mut C) -> RefMut<'_, T> {
        let start = clock.now().max(self.free_at.get());
        clock.advance_to(start + clock.section_cost());
        self.free_at.set(clock.now());
        self.value.borrow_mut()
    }

    fn into_inner(self) -> T {
        self.value.into_inner()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimFamily;

impl LockFamily for SimFamily {
    type Lock<T> = SimLock<T>;
}

/// Simulated clock: evaluation advances it by exactly the requested delay.
#[derive(Debug, Clone, Default)]
pub struct SimClock {
    pub now: u64,
    pub section_cost: u64,
}

impl SimClock {
    pub fn new(section_cost: u64) -> Self {
        SimClock { now: 0, section_cost }
    }
}

impl WorkerClock for SimClock {
    fn now(&self) -> u64 {
        self.now
    }
    fn advance_to(&mut self, t: u64) {
        self.now = self.now.max(t);
    }
    fn section_cost(&self) -> u64 {
        self.section_cost
    }
    fn spend(&mut self, ns: u64) {
        self.now += ns;
    }
}
