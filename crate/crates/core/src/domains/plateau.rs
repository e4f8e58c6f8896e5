//! The plateau family: a strictly improving chain where every chain state also
//! leads to strictly worse siblings.
//!
//! With depth `d` and width `x` the chain is `s_0 -> s_1 -> ... -> s_{d-1} ->
//! goal`. Chain state `s_i` has heuristic `d - i`; its `x` siblings sit one
//! level deeper and get `d - i`, one more than the chain child. GBFS
//! therefore walks the chain and the BTS is exactly the chain plus the goal.
//! Optional decoy trees hang below every sibling (binary, `decoy_depth`
//! levels, same h as their root sibling); they keep unconstrained searches
//! busy without changing the BTS.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::topology::{ExplicitTopology, HValue, StateId};

/// Where the interesting states of a generated plateau live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlateauLayout {
    /// `s_0 .. s_{d-1}` followed by the goal.
    pub chain: Vec<StateId>,
    pub goal: StateId,
    /// Sibling successors grouped by the chain state that generates them.
    pub siblings: Vec<Vec<StateId>>,
}

impl PlateauLayout {
    pub fn of(depth: u32, width: u32) -> Self {
        let d = depth as usize;
        let x = width as usize;
        let chain = (0..=d).map(StateId::from).collect();
        let siblings = (0..d)
            .map(|i| (0..x).map(|j| StateId::from(d + 1 + i * x + j)).collect())
            .collect();
        PlateauLayout { chain, goal: StateId::from(d), siblings }
    }
}

pub fn gen_plateau(depth: u32, width: u32, seed: u64) -> ExplicitTopology {
    gen_plateau_with_decoys(depth, width, 0, seed)
}

/// The seed only permutes successor order of each chain state, so FIFO
/// tie-breaking sees different generation orders.
pub fn gen_plateau_with_decoys(
    depth: u32,
    width: u32,
    decoy_depth: u32,
    seed: u64,
) -> ExplicitTopology {
    assert!(depth >= 1, "plateau depth must be at least 1");
    let d = depth as usize;
    let layout = PlateauLayout::of(depth, width);
    let base = d + 1 + d * width as usize;
    let mut h: Vec<HValue> = vec![0; base];
    let mut goal = vec![false; base];
    let mut succ: Vec<Vec<StateId>> = vec![Vec::new(); base];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for (i, hv) in h.iter_mut().take(d).enumerate() {
        *hv = (d - i) as HValue;
    }
    goal[d] = true;
    for (i, sibs) in layout.siblings.iter().enumerate() {
        let mut children = Vec::with_capacity(sibs.len() + 1);
        children.push(layout.chain[i + 1]);
        for &s in sibs {
            h[s.index()] = (d - i) as HValue;
            children.push(s);
        }
        children.shuffle(&mut rng);
        succ[i] = children;
    }

    if decoy_depth > 0 {
        for sibs in &layout.siblings {
            for &root in sibs {
                let root_h = h[root.index()];
                let mut frontier = vec![root];
                for _ in 0..decoy_depth {
                    let mut next = Vec::with_capacity(frontier.len() * 2);
                    for &p in &frontier {
                        for _ in 0..2 {
                            let id = StateId::from(h.len());
                            h.push(root_h);
                            goal.push(false);
                            succ.push(Vec::new());
                            succ[p.index()].push(id);
                            next.push(id);
                        }
                    }
                    frontier = next;
                }
            }
        }
    }

    ExplicitTopology::new(h, goal, succ, StateId(0)).expect("plateau construction is valid")
}
