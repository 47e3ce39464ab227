//! Hopcroft-Karp and the brute-force oracles the matcher is checked against.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geo::{GeoError, PointSet};
use crate::graph::{BipartiteGraph, EdgeId};

/// A matching stored as the matched edge of every A- and B-vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    a_edge: Vec<Option<EdgeId>>,
    b_edge: Vec<Option<EdgeId>>,
    size: usize,
}

impl Matching {
    pub fn empty(graph: &BipartiteGraph) -> Self {
        Matching {
            a_edge: vec![None; graph.n_a()],
            b_edge: vec![None; graph.n_b()],
            size: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn edge_of_a(&self, a: usize) -> Option<EdgeId> {
        self.a_edge[a]
    }

    pub fn edge_of_b(&self, b: usize) -> Option<EdgeId> {
        self.b_edge[b]
    }

    /// Matched edges in increasing A order.
    pub fn edges(&self) -> Vec<EdgeId> {
        self.a_edge.iter().flatten().copied().collect()
    }

    pub fn weight(&self, graph: &BipartiteGraph) -> u64 {
        self.a_edge.iter().flatten().map(|&e| graph.weight(e) as u64).sum()
    }
}

const UNLAYERED: u32 = u32::MAX;

/// Maximum-cardinality matching over the edges accepted by `edge_filter`.
///
/// Each phase layers the graph by BFS from the free A-vertices and then
/// augments along a maximal set of vertex-disjoint shortest augmenting paths.
pub fn hopcroft_karp<F>(graph: &BipartiteGraph, edge_filter: F) -> Matching
where
    F: Fn(EdgeId) -> bool,
{
    let n_a = graph.n_a();
    let mut m = Matching::empty(graph);
    let mut dist = vec![UNLAYERED; n_a];
    let mut cursor = vec![0usize; n_a];
    let mut queue = VecDeque::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut path: Vec<EdgeId> = Vec::new();
    loop {
        // BFS layering; `limit` is the length of a shortest augmenting path.
        queue.clear();
        for a in 0..n_a {
            if m.a_edge[a].is_none() {
                dist[a] = 0;
                queue.push_back(a);
            } else {
                dist[a] = UNLAYERED;
            }
        }
        let mut limit = UNLAYERED;
        while let Some(a) = queue.pop_front() {
            if dist[a] >= limit {
                continue;
            }
            for &e in graph.adj_a(a) {
                if !edge_filter(e) {
                    continue;
                }
                match m.b_edge[graph.edge(e).b] {
                    None => limit = limit.min(dist[a] + 1),
                    Some(me) => {
                        let next = graph.edge(me).a;
                        if dist[next] == UNLAYERED {
                            dist[next] = dist[a] + 1;
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        if limit == UNLAYERED {
            return m;
        }

        cursor.iter_mut().for_each(|c| *c = 0);
        for root in 0..n_a {
            if m.a_edge[root].is_some() || dist[root] != 0 {
                continue;
            }
            stack.clear();
            path.clear();
            stack.push(root);
            while let Some(&a) = stack.last() {
                let adj = graph.adj_a(a);
                if cursor[a] == adj.len() {
                    dist[a] = UNLAYERED;
                    stack.pop();
                    path.pop();
                    continue;
                }
                let e = adj[cursor[a]];
                cursor[a] += 1;
                if !edge_filter(e) {
                    continue;
                }
                match m.b_edge[graph.edge(e).b] {
                    None => {
                        if dist[a] + 1 == limit {
                            path.push(e);
                            for &pe in &path {
                                let edge = graph.edge(pe);
                                m.a_edge[edge.a] = Some(pe);
                                m.b_edge[edge.b] = Some(pe);
                            }
                            m.size += 1;
                            break;
                        }
                    }
                    Some(me) => {
                        let next = graph.edge(me).a;
                        if dist[next] != UNLAYERED && dist[next] == dist[a] + 1 {
                            path.push(e);
                            stack.push(next);
                        }
                    }
                }
            }
        }
    }
}

/// Exact maximum matching with an optional König vertex cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub matching_size: usize,
    pub matching: Vec<EdgeId>,
    /// Unified vertex ids of a minimum vertex cover.
    pub certificate: Option<Vec<usize>>,
}

/// Intended upper bound on `n_a + n_b` for [`brute_force_max_matching`].
pub const BRUTE_FORCE_VERTEX_LIMIT: usize = 200;

/// One augmenting path per A-vertex (Kuhn), then a König cover from the
/// vertices reachable from free A-vertices by alternating paths.
pub fn brute_force_max_matching(graph: &BipartiteGraph) -> OracleResult {
    if graph.vertex_count() > BRUTE_FORCE_VERTEX_LIMIT {
        log::warn!(
            "brute-force oracle on {} vertices exceeds the intended limit of {}",
            graph.vertex_count(),
            BRUTE_FORCE_VERTEX_LIMIT
        );
    }
    let mut mate_b: Vec<Option<usize>> = vec![None; graph.n_b()];
    for a in 0..graph.n_a() {
        let mut seen = vec![false; graph.n_b()];
        try_kuhn(graph, a, &mut seen, &mut mate_b);
    }
    let mut mate_a: Vec<Option<usize>> = vec![None; graph.n_a()];
    for (b, ma) in mate_b.iter().enumerate() {
        if let Some(a) = *ma {
            mate_a[a] = Some(b);
        }
    }
    let mut matching = Vec::new();
    for a in 0..graph.n_a() {
        if let Some(b) = mate_a[a] {
            let e = graph.adj_a(a).iter().copied().find(|&e| graph.edge(e).b == b).unwrap();
            matching.push(e);
        }
    }

    // Alternating reachability from free A-vertices.
    let mut reach_a = vec![false; graph.n_a()];
    let mut reach_b = vec![false; graph.n_b()];
    let mut queue: VecDeque<usize> = (0..graph.n_a()).filter(|&a| mate_a[a].is_none()).collect();
    for &a in &queue {
        reach_a[a] = true;
    }
    while let Some(a) = queue.pop_front() {
        for &e in graph.adj_a(a) {
            let b = graph.edge(e).b;
            if mate_a[a] == Some(b) || reach_b[b] {
                continue;
            }
            reach_b[b] = true;
            if let Some(next) = mate_b[b] {
                if !reach_a[next] {
                    reach_a[next] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    let mut cover: Vec<usize> = (0..graph.n_a()).filter(|&a| !reach_a[a]).collect();
    cover.extend((0..graph.n_b()).filter(|&b| reach_b[b]).map(|b| graph.b_vertex(b)));

    OracleResult {
        matching_size: matching.len(),
        matching,
        certificate: Some(cover),
    }
}

fn try_kuhn(graph: &BipartiteGraph, a: usize, seen: &mut [bool], mate_b: &mut [Option<usize>]) -> bool {
    for &e in graph.adj_a(a) {
        let b = graph.edge(e).b;
        if seen[b] {
            continue;
        }
        seen[b] = true;
        let free_or_reroutable = match mate_b[b] {
            None => true,
            Some(other) => try_kuhn(graph, other, seen, mate_b),
        };
        if free_or_reroutable {
            mate_b[b] = Some(a);
            return true;
        }
    }
    false
}

/// Exact bottleneck distance with a witness perfect matching `(a, b)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckOracle {
    pub distance: f64,
    pub squared: f64,
    pub pairs: Vec<(usize, usize)>,
}

/// Binary search over the sorted pairwise squared distances, testing each
/// candidate with Hopcroft-Karp restricted to edges no longer than it.
pub fn oracle_bottleneck(points: &PointSet) -> Result<BottleneckOracle, GeoError> {
    points.check_balanced()?;
    let n = points.a.len();
    if n == 0 {
        return Ok(BottleneckOracle {
            distance: 0.0,
            squared: 0.0,
            pairs: Vec::new(),
        });
    }
    let mut edges = Vec::with_capacity(n * n);
    let mut d2 = Vec::with_capacity(n * n);
    for (i, pa) in points.a.iter().enumerate() {
        for (j, pb) in points.b.iter().enumerate() {
            edges.push((i, j, 1));
            d2.push(pa.dist2(pb));
        }
    }
    let graph = BipartiteGraph::new(n, n, edges).expect("complete graph is valid");
    let mut candidates = d2.clone();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let perfect_at = |threshold: f64| {
        let m = hopcroft_karp(&graph, |e| d2[e] <= threshold);
        (m.size() == n).then_some(m)
    };
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_at(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let squared = candidates[lo];
    let m = perfect_at(squared).expect("largest candidate admits a perfect matching");
    let pairs = (0..n)
        .map(|a| (a, graph.edge(m.edge_of_a(a).unwrap()).b))
        .collect();
    Ok(BottleneckOracle {
        distance: squared.sqrt(),
        squared,
        pairs,
    })
}
