//! Ground truth for BTS-constrainedness on small explicit topologies.
//!
//! Two independent computations of the bench transition system are provided:
//! [`bts_enumerate`] runs every tie-breaking of sequential GBFS exhaustively,
//! and [`bts_via_hwm`] derives membership structurally from high-water marks
//! and benches. They are expected to agree; the enumeration is authoritative.
//!
//! Membership covers every state GBFS removes from Open under some
//! tie-breaking, so a goal that can be popped is a member.

use alloc::collections::{BTreeSet, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rustc_hash::FxBuildHasher;

use crate::engine::trace::SearchTrace;
use crate::topology::{ExplicitTopology, HValue, StateId, StateSpace};

/// Largest topology [`high_water_marks`] and [`bts_via_hwm`] accept.
pub const HWM_STATE_CAP: usize = 1 << 20;
/// Default reachable-state cap of [`bts_enumerate`].
pub const DEFAULT_ENUM_STATE_CAP: usize = 30;
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("topology has {states} states, above the oracle cap of {cap}")]
    TooLarge { states: usize, cap: usize },
    #[error("oracle inconclusive: configuration budget of {budget} exhausted")]
    Inconclusive { budget: u64 },
    #[error("trace fingerprint {trace:?} does not match BTS fingerprint {bts:016x}")]
    FingerprintMismatch { trace: Option<u64>, bts: u64 },
}

/// High-water mark per state; `None` stands for infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwmTable {
    values: Vec<Option<HValue>>,
}

impl HwmTable {
    pub fn get(&self, s: StateId) -> Option<HValue> {
        self.values[s.index()]
    }

    pub fn values(&self) -> &[Option<HValue>] {
        &self.values
    }

    /// Minimum over the successors of `s`; infinite when `s` has none.
    pub fn of_successors(&self, topo: &ExplicitTopology, s: StateId) -> Option<HValue> {
        topo.succ(s).iter().filter_map(|&t| self.get(t)).min()
    }
}

/// Bottleneck shortest paths from the goal set over reversed edges.
pub fn high_water_marks(topo: &ExplicitTopology) -> Result<HwmTable, OracleError> {
    let n = topo.num_states();
    if n > HWM_STATE_CAP {
        return Err(OracleError::TooLarge { states: n, cap: HWM_STATE_CAP });
    }
    let pred = topo.predecessors();
    let mut values: Vec<Option<HValue>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for g in topo.goals() {
        values[g.index()] = Some(0);
        heap.push(Reverse((0, g)));
    }
    while let Some(Reverse((v, s))) = heap.pop() {
        if values[s.index()] != Some(v) {
            continue;
        }
        for &p in &pred[s.index()] {
            let cand = v.max(topo.heuristic(p));
            if values[p.index()].is_none_or(|cur| cand < cur) {
                values[p.index()] = Some(cand);
                heap.push(Reverse((cand, p)));
            }
        }
    }
    Ok(HwmTable { values })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BtsSet {
    pub members: BTreeSet<StateId>,
    pub topology_hash: u64,
}

impl BtsSet {
    pub fn contains(&self, s: StateId) -> bool {
        self.members.contains(&s)
    }

    pub fn sorted_members(&self) -> Vec<StateId> {
        self.members.iter().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOptions {
    /// Maximum number of states reachable from the initial state (at most 64).
    pub state_cap: usize,
    /// Maximum number of distinct search configurations visited.
    pub budget: u64,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { state_cap: DEFAULT_ENUM_STATE_CAP, budget: DEFAULT_ENUM_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumStats {
    pub configurations: u64,
    pub budget: u64,
}

pub fn bts_enumerate(topo: &ExplicitTopology) -> Result<BtsSet, OracleError> {
    bts_enumerate_with(topo, &EnumOptions::default()).map(|(b, _)| b)
}

/// Exhaustive nondeterministic GBFS. A configuration is the pair (Closed,
/// Open) as bitmasks over the reachable states; from each one every
/// minimum-h Open state is tried as the next selection.
pub fn bts_enumerate_with(
    topo: &ExplicitTopology,
    opts: &EnumOptions,
) -> Result<(BtsSet, EnumStats), OracleError> {
    let reachable = topo.reachable();
    let local_of: Vec<Option<u32>> = {
        let mut next = 0u32;
        reachable
            .iter()
            .map(|&r| {
                r.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let global: Vec<StateId> =
        (0..topo.num_states()).filter(|&i| reachable[i]).map(StateId::from).collect();
    let m = global.len();
    let cap = opts.state_cap.min(64);
    if m > cap {
        return Err(OracleError::TooLarge { states: m, cap });
    }
    let h: Vec<HValue> = global.iter().map(|&s| topo.heuristic(s)).collect();
    let goal: Vec<bool> = global.iter().map(|&s| topo.is_goal(s)).collect();
    let succ: Vec<u64> = global
        .iter()
        .map(|&s| {
            topo.succ(s)
                .iter()
                .fold(0u64, |acc, t| acc | 1u64 << local_of[t.index()].unwrap())
        })
        .collect();

    let init = local_of[topo.initial().index()].unwrap();
    let start = (1u64 << init, 1u64 << init);
    let mut seen: hashbrown::HashSet<(u64, u64), FxBuildHasher> = Default::default();
    let mut stack = vec![start];
    seen.insert(start);
    let mut members = 0u64;
    while let Some((closed, open)) = stack.pop() {
        if open == 0 {
            continue;
        }
        let min_h = bits(open).map(|i| h[i]).min().unwrap();
        for i in bits(open).filter(|&i| h[i] == min_h) {
            members |= 1 << i;
            if goal[i] {
                continue;
            }
            let fresh = succ[i] & !closed;
            let next = (closed | fresh, (open & !(1 << i)) | fresh);
            if seen.insert(next) {
                if seen.len() as u64 > opts.budget {
                    return Err(OracleError::Inconclusive { budget: opts.budget });
                }
                stack.push(next);
            }
        }
    }
    let set = BtsSet {
        members: bits(members).map(|i| global[i]).collect(),
        topology_hash: topo.fingerprint(),
    };
    Ok((set, EnumStats { configurations: seen.len() as u64, budget: opts.budget }))
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        (mask != 0).then(|| {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            i
        })
    })
}

/// Structural BTS. A state is a progress state when its high-water mark is
/// above the best high-water mark among its successors. Each bench is rooted
/// at a progress state (or the initial state) with level `hwm(succ(root))`;
/// its inner states are reached from the root through non-progress states
/// with `h <= level`, and its exits are the progress states with `h == level`
/// adjacent to the root or an inner state. Every exit roots another bench.
pub fn bts_via_hwm(topo: &ExplicitTopology) -> Result<BtsSet, OracleError> {
    let hwm = high_water_marks(topo)?;
    let init = topo.initial();
    let mut members: BTreeSet<StateId> = BTreeSet::new();
    if topo.is_goal(init) {
        members.insert(init);
        return Ok(BtsSet { members, topology_hash: topo.fingerprint() });
    }

    let n = topo.num_states();
    let progress: Vec<bool> = (0..n)
        .map(|i| {
            let s = StateId::from(i);
            gt_inf(hwm.get(s), hwm.of_successors(topo, s))
        })
        .collect();

    let mut rooted = vec![false; n];
    let mut roots = VecDeque::from([init]);
    rooted[init.index()] = true;
    while let Some(root) = roots.pop_front() {
        members.insert(root);
        let level = hwm.of_successors(topo, root);
        let admits = |t: StateId| level.is_none_or(|l| topo.heuristic(t) <= l);
        let mut seen = vec![false; n];
        seen[root.index()] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(s) = queue.pop_front() {
            for &t in topo.succ(s) {
                if seen[t.index()] || !admits(t) {
                    continue;
                }
                seen[t.index()] = true;
                if !progress[t.index()] {
                    members.insert(t);
                    queue.push_back(t);
                } else if Some(topo.heuristic(t)) == level && !rooted[t.index()] {
                    rooted[t.index()] = true;
                    roots.push_back(t);
                }
            }
        }
    }
    Ok(BtsSet { members, topology_hash: topo.fingerprint() })
}

/// `a > b` with `None` as infinity.
fn gt_inf(a: Option<HValue>, b: Option<HValue>) -> bool {
    match (a, b) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(x), Some(y)) => x > y,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintReport {
    /// Selected states outside the BTS, in first-selection order.
    pub violations: Vec<StateId>,
    pub selected: usize,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every state the trace removed from Open that is not a BTS member.
pub fn check_trace_constrained(
    trace: &SearchTrace,
    bts: &BtsSet,
) -> Result<ConstraintReport, OracleError> {
    if trace.fingerprint != Some(bts.topology_hash) {
        return Err(OracleError::FingerprintMismatch {
            trace: trace.fingerprint,
            bts: bts.topology_hash,
        });
    }
    let selected = trace.selected();
    let mut violations = Vec::new();
    for &s in &selected {
        if !bts.contains(s) && !violations.contains(&s) {
            violations.push(s);
        }
    }
    Ok(ConstraintReport { violations, selected: selected.len() })
}
