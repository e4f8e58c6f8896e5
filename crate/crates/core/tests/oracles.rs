use pgbfs_core::domains::{gen_plateau, gen_random, RandomParams};
use pgbfs_core::engine::{gbfs_sequential, EngineConfig};
use pgbfs_core::oracle::{bts_enumerate, bts_via_hwm, check_trace_constrained, high_water_marks};
use pgbfs_core::topology::{ExplicitTopology, HValue, StateId, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(rng: &mut ChaCha8Rng, max_states: usize) -> ExplicitTopology {
    let params = RandomParams {
        num_states: rng.gen_range(2..=max_states),
        edge_density: rng.gen_range(0.1..0.45),
        h_max: rng.gen_range(0..=6),
        goal_count: rng.gen_range(1..=3),
    };
    gen_random(&params, rng.gen()).unwrap()
}

/// Max-of-path minimized over all simple goal paths, by brute force.
fn hwm_brute(t: &ExplicitTopology, s: StateId) -> Option<HValue> {
    fn go(t: &ExplicitTopology, s: StateId, on_path: &mut Vec<bool>, acc: HValue) -> Option<HValue> {
        let acc = acc.max(t.heuristic(s));
        if t.is_goal(s) {
            return Some(acc);
        }
        on_path[s.index()] = true;
        let mut best = None;
        for &n in t.succ(s) {
            if !on_path[n.index()] {
                best = best.into_iter().chain(go(t, n, on_path, acc)).min();
            }
        }
        on_path[s.index()] = false;
        best
    }
    go(t, s, &mut vec![false; t.num_states()], 0)
}

#[test]
fn hwm_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let t = sample(&mut rng, 10);
        let table = high_water_marks(&t).unwrap();
        for i in 0..t.num_states() {
            let s = StateId::from(i);
            assert_eq!(table.get(s), hwm_brute(&t, s), "state {s} of {t:?}");
            if !t.is_goal(s) && table.get(s).is_some() {
                assert_eq!(table.get(s), table.of_successors(&t, s).map(|m| m.max(t.heuristic(s))));
            }
        }
    }
}

#[test]
fn dual_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..300 {
        let t = sample(&mut rng, 12);
        let a = bts_enumerate(&t).unwrap();
        let b = bts_via_hwm(&t).unwrap();
        assert_eq!(a.members, b.members, "sample {i}: {:?}\n{:?}", t, (t.h_values(), (0..t.num_states()).map(|j| t.succ(StateId::from(j)).to_vec()).collect::<Vec<_>>(), t.goal_flags()));
    }
}

#[test]
fn sequential_gbfs_stays_inside_the_bts() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let t = sample(&mut rng, 20);
        let bts = bts_enumerate(&t).unwrap();
        let reachable = t.reachable();
        assert!(bts.members.iter().all(|s| reachable[s.index()]));
        assert!(bts.contains(t.initial()));
        let r = gbfs_sequential(&t, &EngineConfig::gbfs()).unwrap();
        assert!(check_trace_constrained(&r.trace, &bts).unwrap().passed());
    }
}

#[test]
fn plateau_bts_examples() {
    for (d, x) in [(2, 2), (4, 3), (3, 5)] {
        let t = gen_plateau(d, x, 3);
        let chain: Vec<StateId> = (0..=d).map(StateId).collect();
        assert_eq!(bts_enumerate(&t).unwrap().sorted_members(), chain);
        assert_eq!(bts_via_hwm(&t).unwrap().sorted_members(), chain);
    }
}
