use super::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn graph(n: usize, follows: &[(u32, u32)]) -> CommunityGraph {
    CommunityGraph::from_follows(n, follows.iter().map(|&(a, b)| (NodeId(a), NodeId(b))))
        .unwrap()
        .0
}

fn probs(g: &CommunityGraph, edges: &[(u32, u32, f64)]) -> EdgeProbabilities {
    let mut p = EdgeProbabilities::zeros(g);
    for &(u, v, q) in edges {
        p.set(g, NodeId(u), NodeId(v), q).unwrap();
    }
    p
}

fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().copied().map(NodeId).collect()
}

/// u1, u2 -> u3 as nodes 0, 1 -> 2.
fn two_influencers(p13: f64, p23: f64) -> (CommunityGraph, EdgeProbabilities) {
    let g = graph(3, &[(2, 0), (2, 1)]);
    let p = probs(&g, &[(0, 2, p13), (1, 2, p23)]);
    (g, p)
}

/// u1, u2, u3 -> u4 as nodes 0, 1, 2 -> 3.
fn three_influencers(p14: f64, p24: f64, p34: f64) -> (CommunityGraph, EdgeProbabilities) {
    let g = graph(4, &[(3, 0), (3, 1), (3, 2)]);
    let p = probs(&g, &[(0, 3, p14), (1, 3, p24), (2, 3, p34)]);
    (g, p)
}

#[test]
fn fi_certain_and_impossible_edges() {
    let (g, p) = two_influencers(1.0, 0.3);
    assert_eq!(simulate_fi(&g, &p, &ids(&[0]), 1).unwrap(), ids(&[0, 2]));

    let (g, p) = two_influencers(0.0, 0.3);
    assert_eq!(simulate_fi(&g, &p, &ids(&[0]), 1).unwrap(), ids(&[0]));
    let trace = Diffusion::new(&g, &p).trace_fi(&ids(&[0]), 1).unwrap();
    // after the failed attempt u3 is insusceptible; the run ends after slot 0
    assert_eq!(trace.attempts, vec![0, 0, 1]);
}

#[test]
fn fi_first_timer_decides() {
    let (g, p) = two_influencers(1.0, 0.0);
    let runs = 20_000;
    let hits = (0..runs)
        .filter(|&s| {
            simulate_fi(&g, &p, &ids(&[0, 1]), s)
                .unwrap()
                .contains(&NodeId(2))
        })
        .count();
    let frac = hits as f64 / runs as f64;
    // binomial sd = 0.0035
    assert!((frac - 0.5).abs() < 0.015, "{frac}");
}

#[test]
fn ic_cases() {
    let g = graph(2, &[(1, 0)]);
    let p = probs(&g, &[(0, 1, 1.0)]);
    assert_eq!(simulate_ic(&g, &p, &ids(&[0]), 3).unwrap(), ids(&[0, 1]));
    assert!(simulate_ic(&g, &p, &[], 3).unwrap().is_empty());
    assert!(simulate_fi(&g, &p, &[], 3).unwrap().is_empty());

    let (g, p) = two_influencers(0.5, 0.5);
    let runs = 20_000;
    let hits = (0..runs)
        .filter(|&s| {
            simulate_ic(&g, &p, &ids(&[0, 1]), s)
                .unwrap()
                .contains(&NodeId(2))
        })
        .count();
    let frac = hits as f64 / runs as f64;
    assert!((frac - 0.75).abs() < 0.013, "{frac}");
}

#[test]
fn unknown_seed_is_an_error() {
    let (g, p) = two_influencers(0.5, 0.5);
    assert!(matches!(
        simulate_fi(&g, &p, &ids(&[3]), 0),
        Err(Error::UnknownNode(3))
    ));
    assert!(simulate_ic(&g, &p, &ids(&[9]), 0).is_err());
    assert!(estimate_spread(&g, &p, &ids(&[9]), Model::Fi, 10, 0).is_err());
    assert!(estimate_spread(&g, &p, &ids(&[0]), Model::Fi, 0, 0).is_err());
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let (g, p) = three_influencers(0.5, 0.5, 0.5);
    for s in 0..20 {
        assert_eq!(
            simulate_fi(&g, &p, &ids(&[0, 1, 2]), s).unwrap(),
            simulate_fi(&g, &p, &ids(&[0, 1, 2]), s).unwrap()
        );
    }
}

#[test]
fn estimate_spread_degenerate_cases() {
    let g = graph(4, &[(1, 0), (2, 1), (3, 2), (0, 3)]);
    let zero = EdgeProbabilities::zeros(&g);
    for model in [Model::Fi, Model::Ic] {
        let est = estimate_spread(&g, &zero, &ids(&[0]), model, 500, 1).unwrap();
        assert_eq!(est.mean_exclusive, 0.0);
        assert_eq!(est.mean_inclusive, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    let n = 6;
    let follows: Vec<(u32, u32)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let complete = graph(n as usize, &follows);
    let one = EdgeProbabilities::constant(&complete, 1.0);
    for model in [Model::Fi, Model::Ic] {
        let est = estimate_spread(&complete, &one, &ids(&[3]), model, 100, 2).unwrap();
        assert_eq!(est.mean_inclusive, n as f64);
        assert_eq!(est.mean_exclusive, n as f64 - 1.0);
    }
}

#[test]
fn duplicate_seeds_count_once() {
    let (g, p) = two_influencers(0.0, 0.0);
    let est = estimate_spread(&g, &p, &ids(&[0, 0, 1]), Model::Fi, 10, 0).unwrap();
    assert_eq!(est.mean_inclusive, 2.0);
    assert_eq!(est.mean_exclusive, 0.0);
}

#[test]
fn estimate_matches_two_influencer_average() {
    let (g, p) = two_influencers(0.8, 0.2);
    let est = estimate_spread(&g, &p, &ids(&[0, 1]), Model::Fi, 100_000, 11).unwrap();
    assert!(
        (est.mean_exclusive - 0.5).abs() <= 3.0 * est.std_error,
        "{est:?}"
    );
}

#[test]
fn estimate_is_independent_of_thread_count() {
    let (g, p) = three_influencers(0.6, 0.3, 0.2);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_spread(&g, &p, &ids(&[0, 1]), Model::Fi, 5_000, 5).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.mean_inclusive.to_bits(), b.mean_inclusive.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}

#[test]
fn exact_fi_hand_examples() {
    let (g, p) = two_influencers(0.8, 0.2);
    let one = exact_spread_fi(&g, &p, &ids(&[0])).unwrap();
    assert_abs_diff_eq!(one.exclusive, 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(one.inclusive, 1.8, epsilon = 1e-12);
    let two = exact_spread_fi(&g, &p, &ids(&[0, 1])).unwrap();
    assert_abs_diff_eq!(two.exclusive, 0.5, epsilon = 1e-12);

    let (g, p) = three_influencers(0.9, 0.1, 0.1);
    let three = exact_spread_fi(&g, &p, &ids(&[0, 1, 2])).unwrap();
    assert_abs_diff_eq!(three.exclusive, (0.9 + 0.1 + 0.1) / 3.0, epsilon = 1e-12);
}

#[test]
fn exact_fi_hand_computed_chain() {
    // 0 -> 1 -> 2 and 0 -> 2: node 2 follows both 0 and 1
    let g = graph(3, &[(1, 0), (2, 0), (2, 1)]);
    let p = probs(&g, &[(0, 1, 0.5), (0, 2, 0.3), (1, 2, 0.9)]);
    // slot 0: 0 attempts 1 and 2 (only attempter). 2 is settled in slot 0.
    // E = 0.5 + 0.3
    let s = exact_spread_fi(&g, &p, &ids(&[0])).unwrap();
    assert_abs_diff_eq!(s.exclusive, 0.8, epsilon = 1e-12);
    // IC: 1 w.p. 0.5; 2 w.p. 1 - 0.7 * (1 - 0.5 * 0.9)
    let s = exact_spread_ic(&g, &p, &ids(&[0])).unwrap();
    assert_abs_diff_eq!(s.exclusive, 0.5 + 1.0 - 0.7 * (1.0 - 0.45), epsilon = 1e-12);
}

#[test]
fn exact_ic_cases() {
    let g = graph(2, &[(1, 0)]);
    let p = probs(&g, &[(0, 1, 0.3)]);
    assert_abs_diff_eq!(
        exact_spread_ic(&g, &p, &ids(&[0])).unwrap().exclusive,
        0.3,
        epsilon = 1e-12
    );

    let (g, p) = two_influencers(0.5, 0.5);
    assert_abs_diff_eq!(
        exact_spread_ic(&g, &p, &ids(&[0, 1])).unwrap().exclusive,
        0.75,
        epsilon = 1e-12
    );

    // chain 0 -> 1 -> 2 and isolated 3
    let g = graph(4, &[(1, 0), (2, 1)]);
    let p = EdgeProbabilities::constant(&g, 1.0);
    assert_eq!(exact_spread_ic(&g, &p, &ids(&[0])).unwrap().exclusive, 2.0);
    assert_eq!(
        exact_spread_ic(&g, &p, &ids(&[1, 3])).unwrap().exclusive,
        1.0
    );
}

#[test]
fn exact_oracle_guards() {
    let big = graph(17, &[]);
    let p = EdgeProbabilities::zeros(&big);
    assert!(matches!(
        exact_spread_fi(&big, &p, &ids(&[0])),
        Err(Error::OracleTooLarge { .. })
    ));

    let star = graph(10, &(1..10).map(|i| (0, i)).collect::<Vec<_>>());
    let p = EdgeProbabilities::constant(&star, 0.5);
    let nine: Vec<NodeId> = (1..10).map(NodeId).collect();
    assert!(matches!(
        exact_spread_fi(&star, &p, &nine),
        Err(Error::OracleTooLarge { .. })
    ));

    let follows: Vec<(u32, u32)> = (0..6)
        .flat_map(|a| (0..6).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let dense = graph(6, &follows);
    let p = EdgeProbabilities::constant(&dense, 0.5);
    assert!(matches!(
        exact_spread_ic(&dense, &p, &ids(&[0])),
        Err(Error::OracleTooLarge { .. })
    ));
}

#[test]
fn epsilon_reattempts_match_oracle() {
    // 0 -> 2 fails first; 1 is activated by 0 and retries 2 later
    let g = graph(3, &[(1, 0), (2, 0), (2, 1)]);
    let p = probs(&g, &[(0, 1, 1.0), (0, 2, 0.2), (1, 2, 0.9)]);
    let d = Diffusion::new(&g, &p).with_epsilon(0.25);
    let exact = d.exact_fi(&ids(&[0])).unwrap();
    assert_abs_diff_eq!(exact.exclusive, 1.0 + 0.2 + 0.8 * 0.25, epsilon = 1e-12);
    let est = d.estimate(Model::Fi, &ids(&[0]), 50_000, 3).unwrap();
    assert!((est.mean_exclusive - exact.exclusive).abs() <= 3.0 * est.std_error);
    assert_abs_diff_eq!(
        Diffusion::new(&g, &p)
            .exact_fi(&ids(&[0]))
            .unwrap()
            .exclusive,
        1.2,
        epsilon = 1e-12
    );
}

fn arb_instance() -> impl Strategy<Value = (CommunityGraph, EdgeProbabilities, Vec<NodeId>)> {
    (2usize..8).prop_flat_map(|n| {
        let m = n as u32;
        (
            prop::collection::vec((0..m, 0..m), 0..14),
            prop::collection::vec(0..m, 0..4),
        )
            .prop_flat_map(move |(follows, seeds)| {
                let g = graph(n, &follows);
                let e = g.edge_count();
                (Just(g), prop::collection::vec(0.0f64..=1.0, e), Just(seeds))
            })
            .prop_map(|(g, p, seeds)| {
                let p = EdgeProbabilities::from_vec(&g, p).unwrap();
                (g, p, seeds.into_iter().map(NodeId).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fi_slots_partition_nodes_and_attempt_once((g, p, seeds) in arb_instance(), seed in 0u64..1000) {
        let trace = Diffusion::new(&g, &p).trace_fi(&seeds, seed).unwrap();
        for s in &trace.slots {
            let mut all: Vec<NodeId> = s.active.iter().chain(&s.insusceptible).chain(&s.susceptible).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, g.nodes().collect::<Vec<_>>());
            prop_assert!(s.newly_active.iter().all(|v| s.active.contains(v)));
        }
        prop_assert!(trace.attempts.iter().all(|&a| a <= 1));
    }

    #[test]
    fn ic_exact_spread_is_monotone((g, p, seeds) in arb_instance(), extra in 0u32..8) {
        let x = NodeId(extra % g.node_count() as u32);
        let base = exact_spread_ic(&g, &p, &seeds).unwrap();
        let mut more = seeds.clone();
        more.push(x);
        let bigger = exact_spread_ic(&g, &p, &more).unwrap();
        prop_assert!(bigger.inclusive >= base.inclusive - 1e-12);
    }

    #[test]
    fn exact_spreads_are_bounded((g, p, seeds) in arb_instance()) {
        let n = g.node_count() as f64;
        for s in [exact_spread_fi(&g, &p, &seeds).unwrap(), exact_spread_ic(&g, &p, &seeds).unwrap()] {
            prop_assert!(s.exclusive >= -1e-12 && s.inclusive <= n + 1e-12);
        }
        // FI never spreads further than IC with the same probabilities
        let fi = exact_spread_fi(&g, &p, &seeds).unwrap();
        let ic = exact_spread_ic(&g, &p, &seeds).unwrap();
        prop_assert!(fi.inclusive <= ic.inclusive + 1e-9);
    }
}
