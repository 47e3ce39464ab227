mod common;

use std::collections::VecDeque;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zom::audit::InvariantAudit;
use zom::graph::check_feasibility;
use zom::matcher::{run_matcher_with, PhaseObserver};
use zom::{brute_force_max_matching, compute_pieces, hopcroft_karp, run_matcher, BipartiteGraph, MatchState};

fn instance(seed: u64, n_a: usize, n_b: usize, m: usize, p: f64) -> BipartiteGraph {
    common::random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n_a, n_b, m, p)
}

/// Independent stage-1 oracle: compares Dial's distances with a binary-heap
/// Dijkstra and records every violated per-state property.
#[derive(Default)]
struct DistanceCheck {
    errors: Vec<String>,
}

impl PhaseObserver for DistanceCheck {
    fn after_preprocess(&mut self, graph: &BipartiteGraph, _pieces: &zom::PieceDecomposition, state: &MatchState) {
        self.check(graph, state)
    }

    fn after_stage2(&mut self, graph: &BipartiteGraph, state: &MatchState, _s: &zom::PhaseStats) {
        self.check(graph, state)
    }
}

impl DistanceCheck {
    /// Before every stage 1, the threshold the matcher will use is the
    /// oracle distance of the nearest free A-vertex.
    fn check(&mut self, graph: &BipartiteGraph, state: &MatchState) {
        let oracle = common::residual_distances(graph, state);
        let mut probe = state.clone();
        let expect = (0..graph.n_a())
            .filter(|&a| state.is_free(a))
            .filter_map(|a| oracle[a])
            .min();
        match zom::matcher::stage1_dijkstra(graph, &mut probe) {
            zom::matcher::Stage1::Adjusted { ell, dist } => {
                if Some(ell as i64) != expect {
                    self.errors.push(format!("ell {ell} vs oracle {expect:?}"));
                }
                for (v, d) in dist.iter().enumerate() {
                    let o = oracle[v].map(|x| x as u64);
                    let got = (*d != u32::MAX).then_some(*d as u64);
                    if got != o {
                        self.errors.push(format!("vertex {v}: dial {got:?} vs oracle {o:?}"));
                    }
                }
            }
            zom::matcher::Stage1::Exhausted => {
                if expect.is_some() {
                    self.errors.push(format!("exhausted but oracle reaches at {expect:?}"));
                }
            }
            zom::matcher::Stage1::Perfect => {}
        }
    }
}

/// Pieces by BFS over weight-0 edges.
fn bfs_components(graph: &BipartiteGraph) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in graph.incident(v) {
                let u = graph.opposite(e, v);
                if graph.weight(e) == 0 && comp[u] == usize::MAX {
                    comp[u] = next;
                    queue.push_back(u);
                }
            }
        }
        next += 1;
    }
    comp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cardinality_matches_brute_force(seed: u64, n_a in 0usize..25, n_b in 0usize..25, m in 0usize..150, p in prop::sample::select(vec![0.1, 0.5, 0.9])) {
        let g = instance(seed, n_a, n_b, m, p);
        let res = run_matcher(&g);
        prop_assert_eq!(res.size, brute_force_max_matching(&g).matching_size);
        prop_assert_eq!(res.size, hopcroft_karp(&g, |_| true).size());
    }

    #[test]
    fn every_exposed_state_is_clean(seed: u64, n_a in 1usize..20, n_b in 1usize..20, m in 0usize..120, p in 0.0f64..1.0) {
        let g = instance(seed, n_a, n_b, m, p);
        let mut audit = InvariantAudit::with_cycle_check();
        let res = run_matcher_with(&g, &mut audit).unwrap();
        prop_assert!(audit.report.is_clean(), "{:?}", audit.report);
        let state = MatchState::with_matching(&g, &res.matching);
        prop_assert_eq!(state.size(), res.size);
    }

    #[test]
    fn bounds_hold(seed: u64, n in 2usize..30, m in 0usize..200, p in 0.0f64..1.0) {
        let g = instance(seed, n, n, m, p);
        let res = run_matcher(&g);
        prop_assert!(res.ledger.phases_within_limit(), "{:?}", res.ledger);
        prop_assert!(res.ledger.path_weights_within_limit(), "{:?}", res.ledger);
        prop_assert!(res.ledger.violations.is_empty(), "{:?}", res.ledger);
        prop_assert_eq!(res.total_phases, res.phases.len());
        for ph in &res.phases {
            prop_assert!(ph.augmenting_paths >= 1);
            for &c in &ph.path_weights {
                prop_assert_eq!(c as i64, ph.y_max);
            }
        }
    }

    #[test]
    fn stage1_distances_match_heap_dijkstra(seed: u64, n in 1usize..20, m in 0usize..100, p in 0.0f64..1.0) {
        let g = instance(seed, n, n + 2, m, p);
        let mut check = DistanceCheck::default();
        run_matcher_with(&g, &mut check).unwrap();
        prop_assert!(check.errors.is_empty(), "{:?}", check.errors);
    }

    #[test]
    fn pieces_match_bfs_components(seed: u64, n_a in 0usize..30, n_b in 0usize..30, m in 0usize..150, p in 0.0f64..1.0) {
        let g = instance(seed, n_a, n_b, m, p);
        let pieces = compute_pieces(&g);
        let comp = bfs_components(&g);
        for u in 0..g.vertex_count() {
            for v in 0..g.vertex_count() {
                prop_assert_eq!(pieces.piece_of_vertex(u) == pieces.piece_of_vertex(v), comp[u] == comp[v]);
            }
        }
        for (e, edge) in g.edges().iter().enumerate() {
            let expect = (edge.weight == 0).then(|| pieces.piece_of_vertex(edge.a));
            prop_assert_eq!(pieces.piece_of_edge(e), expect);
        }
        prop_assert_eq!(pieces.piece_vertices.iter().sum::<usize>(), g.vertex_count());
    }

    #[test]
    fn final_state_is_feasible_with_integral_duals(seed: u64, n in 1usize..25, m in 0usize..150, p in 0.0f64..1.0) {
        let g = instance(seed, n, n, m, p);
        let res = run_matcher(&g);
        let state = {
            let mut s = MatchState::with_matching(&g, &res.matching);
            for (v, &y) in res.duals.iter().enumerate() {
                s.set_dual(v, y);
            }
            s
        };
        prop_assert!(check_feasibility(&g, &state).is_empty());
        prop_assert_eq!(res.weight, state.matching_weight(&g));
    }
}

#[test]
fn all_zero_needs_no_phase() {
    for seed in 0..20 {
        let g = instance(seed, 20, 20, 120, 0.0);
        let res = run_matcher(&g);
        assert_eq!(res.total_phases, 0);
        assert_eq!(res.size, hopcroft_karp(&g, |_| true).size());
    }
}

#[test]
fn all_one_matches_hopcroft_karp() {
    for seed in 0..20 {
        let g = instance(seed, 20, 18, 120, 1.0);
        assert_eq!(run_matcher(&g).size, hopcroft_karp(&g, |_| true).size());
    }
}
