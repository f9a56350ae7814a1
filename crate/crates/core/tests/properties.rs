use proptest::prelude::*;

use subquad::aggregate::aggregate_aj;
use subquad::counting::{estimate_config_probability, CountingModel, CountingTask, Work};
use subquad::graph::{Graph, Pinning};
use subquad::models::{brute_force_marginal, brute_force_partition, GibbsModel, TwoSpinModel, TwoSpinParams};
use subquad::rng::{sample_multinomial_dense, BinomialOracle, RngStream};
use subquad::samplers::{AjOptions, AjSampler};
use subquad::saw::{boundary, boundary_size_bound, estimate_marginal_saw, CompleteTree, SawCursor};

/// Random simple graph with max degree ≤ 3, built by greedy edge insertion.
fn small_graph() -> impl Strategy<Value = Graph> {
    (2usize..=8, prop::collection::vec((0usize..8, 0usize..8), 0..20)).prop_map(|(n, pairs)| {
        let mut deg = vec![0; n];
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (a, b) in pairs {
            let (a, b) = (a % n, b % n);
            if a == b || deg[a] == 3 || deg[b] == 3 || edges.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            deg[a] += 1;
            deg[b] += 1;
            edges.push((a.min(b), a.max(b)));
        }
        Graph::from_edges(n, &edges).unwrap()
    })
}

fn pinning_of(n: usize, codes: &[u8], root: usize) -> Pinning {
    let mut p = Pinning::new();
    for (v, &c) in codes.iter().enumerate().take(n) {
        if v != root && c < 2 {
            p.set(v, c);
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_is_symmetric(g in small_graph()) {
        let mut degree_sum = 0;
        for v in 0..g.n() {
            degree_sum += g.degree(v);
            for &w in g.neighbors(v) {
                prop_assert!(g.has_edge(w, v));
            }
        }
        prop_assert_eq!(degree_sum, 2 * g.num_edges());
        prop_assert!(g.max_degree() <= 3);
    }

    #[test]
    fn edge_list_round_trips(g in small_graph()) {
        let mut text = format!("{}\n", g.n());
        for (u, v) in g.edges() {
            text.push_str(&format!("{u} {v}\n"));
        }
        let back = Graph::parse_edge_list(&text).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
    }

    // With an unbounded budget the boundary is empty and the estimate is the
    // exact tree recursion, which must match enumeration on the graph.
    #[test]
    fn saw_tree_marginal_matches_enumeration(
        g in small_graph(),
        root in 0usize..8,
        codes in prop::collection::vec(0u8..4, 8),
        lambda in 0.05f64..2.0,
    ) {
        let root = root % g.n();
        let tau = pinning_of(g.n(), &codes, root);
        let params = TwoSpinParams::hardcore(lambda);
        let model = TwoSpinModel::new(g.clone(), params).unwrap();
        prop_assume!(brute_force_partition(&model, &tau).unwrap() > 0.0);
        let exact = brute_force_marginal(&model, root, 1, &tau).unwrap();
        let sampler = AjSampler { lambda, opts: AjOptions { override_regime: true, coin_skew: 0.0 } };
        let est = estimate_marginal_saw(&g, root, &tau, &params, 0.3, 1e18, &sampler, &mut RngStream::new(0)).unwrap();
        prop_assert_eq!(est.boundary_size, 0);
        prop_assert!((est.p - exact).abs() <= 1e-10 * exact.max(1e-300) + 1e-14, "{} vs {}", est.p, exact);
    }

    #[test]
    fn saw_boundary_is_antichain(g in small_graph(), root in 0usize..8, delta in 0.05f64..0.95, budget in 1.0f64..500.0) {
        let root = root % g.n();
        let tau = Pinning::new();
        let s = boundary(&mut SawCursor::new(&g, &tau, root), delta, budget);
        prop_assert!(s.is_antichain());
    }

    #[test]
    fn complete_tree_boundary_within_bound(arity in 2usize..6, delta in 0.05f64..0.95, budget in 2.0f64..1e5) {
        let s = boundary(&mut CompleteTree::new(arity, None), delta, budget);
        prop_assert!(s.is_antichain());
        prop_assert!(s.len() as f64 <= boundary_size_bound(arity, delta, budget) * (1.0 + 1e-9));
    }

    #[test]
    fn chain_rule_recovers_z(g in small_graph(), lambda in 0.1f64..3.0) {
        let model = CountingModel::TwoSpin(TwoSpinModel::new(g, TwoSpinParams::hardcore(lambda)).unwrap());
        let task = CountingTask::new(model.clone(), 0.1, 0).unwrap();
        let est = estimate_config_probability(model.n(), 3, |i, _| {
            Ok((brute_force_marginal(&model, i, task.sigma_star[i], &task.prefix(i))?, Work::default()))
        }).unwrap();
        let z = brute_force_partition(&model, &Pinning::new()).unwrap();
        let z_hat = model.weight(&task.sigma_star) / est.m;
        prop_assert!((z_hat / z - 1.0).abs() < 1e-9);
    }

    #[test]
    fn multinomial_preserves_total(n in 0u64..1_000_000, w in prop::collection::vec(0.0f64..1.0, 1..8), seed: u64) {
        let z: f64 = w.iter().sum();
        prop_assume!(z > 0.0);
        let p: Vec<f64> = w.iter().map(|x| x / z).collect();
        let out = sample_multinomial_dense(&BinomialOracle::new(1 << 40), n, &p, &mut RngStream::new(seed)).unwrap();
        prop_assert_eq!(out.iter().sum::<u64>(), n);
        for (c, q) in out.iter().zip(&p) {
            if *q == 0.0 {
                prop_assert_eq!(*c, 0);
            }
        }
    }

    #[test]
    fn aggregate_hardcore_counts_in_range(g in small_graph(), n in 0u64..5000, seed: u64) {
        let (ones, _) = aggregate_aj(&g, 0.3, 0, &[], n, &mut RngStream::new(seed), &BinomialOracle::new(1 << 20), AjOptions::default()).unwrap();
        prop_assert!(ones <= n);
    }

    #[test]
    fn derived_streams_replay(seed: u64, a: u64, b: u64) {
        let mut x = RngStream::new(seed).derive(a).derive(b);
        let mut y = RngStream::new(seed).derive(a).derive(b);
        for _ in 0..8 {
            prop_assert_eq!(x.uniform().to_bits(), y.uniform().to_bits());
        }
    }
}
