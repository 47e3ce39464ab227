#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::Rng;
use zom::{BipartiteGraph, MatchState, Point, PointSet};

pub fn random_graph<R: Rng>(rng: &mut R, n_a: usize, n_b: usize, m: usize, p_one: f64) -> BipartiteGraph {
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    if n_a > 0 && n_b > 0 {
        let m = m.min(n_a * n_b);
        while edges.len() < m {
            let (a, b) = (rng.gen_range(0..n_a), rng.gen_range(0..n_b));
            if seen.insert((a, b)) {
                edges.push((a, b, rng.gen_bool(p_one) as u64));
            }
        }
    }
    BipartiteGraph::new(n_a, n_b, edges).unwrap()
}

pub fn uniform_points<R: Rng>(rng: &mut R, n: usize) -> PointSet {
    let mut side = || (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
    PointSet::new(side(), side())
}

/// Points scattered around a few random centers.
pub fn clustered_points<R: Rng>(rng: &mut R, n: usize) -> PointSet {
    let k = rng.gen_range(2..=5);
    let centers: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen(), rng.gen())).collect();
    let mut side = || {
        (0..n)
            .map(|_| {
                let (cx, cy) = centers[rng.gen_range(0..k)];
                Point::new(cx + rng.gen_range(-0.05..0.05), cy + rng.gen_range(-0.05..0.05))
            })
            .collect()
    };
    PointSet::new(side(), side())
}

/// Shortest slack distances from the free B-vertices by a plain binary-heap
/// Dijkstra over the residual network, written against the edge list only.
pub fn residual_distances(graph: &BipartiteGraph, state: &MatchState) -> Vec<Option<i64>> {
    let n = graph.vertex_count();
    let mut out: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for (e, edge) in graph.edges().iter().enumerate() {
        let (a, b) = (edge.a, graph.n_a() + edge.b);
        if state.is_matched_edge(graph, e) {
            out[a].push((b, 0));
        } else {
            let slack = edge.weight as i64 + state.dual(a) - state.dual(b);
            assert!(slack >= 0, "negative slack on edge {e}");
            out[b].push((a, slack));
        }
    }
    let mut dist: Vec<Option<i64>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for b in graph.n_a()..n {
        if state.is_free(b) {
            heap.push(Reverse((0i64, b)));
        }
    }
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].is_some() {
            continue;
        }
        dist[v] = Some(d);
        for &(h, s) in &out[v] {
            if dist[h].is_none() {
                heap.push(Reverse((d + s, h)));
            }
        }
    }
    dist
}
