use proptest::prelude::*;
use zom::separator::{assign_weights_recursive, grid_graph_separator, lattice, lattice_from_cells, SeparatorConfig};
use zom::{compute_pieces, hopcroft_karp, run_matcher, BipartiteGraph};

fn pipeline(g: &BipartiteGraph) {
    let n = g.vertex_count();
    let r = ((n as f64).powf(2.0 / 3.0).round() as usize).max(1);
    let config = SeparatorConfig::new(r);
    let assignment = assign_weights_recursive(g, &config, grid_graph_separator).unwrap();
    let weighted = assignment.apply(g).unwrap();
    let pieces = compute_pieces(&weighted);
    assert!(pieces.max_piece_vertices as f64 <= config.piece_vertex_bound(), "{} > {}", pieces.max_piece_vertices, config.piece_vertex_bound());
    assert!(pieces.max_piece_edges as f64 <= config.piece_edge_bound(g));
    let res = run_matcher(&weighted);
    assert_eq!(res.size, hopcroft_karp(g, |_| true).size());
    assert!(res.ledger.w as f64 <= 8.0 * n as f64 / (r as f64).sqrt(), "w {} for n {n}", res.ledger.w);
    assert!(res.ledger.phases_within_limit());
}

#[test]
fn square_lattices() {
    for k in [2, 5, 8, 16, 33, 64] {
        pipeline(&lattice(k, k));
    }
}

#[test]
fn rectangular_lattices() {
    for (r, c) in [(1, 40), (3, 50), (20, 7), (64, 10)] {
        pipeline(&lattice(r, c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lattice_subsets(cells in prop::collection::btree_set((0i64..24, 0i64..24), 1..400)) {
        let cells: Vec<(i64, i64)> = cells.into_iter().collect();
        pipeline(&lattice_from_cells(&cells));
    }
}
