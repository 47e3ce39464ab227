use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index into [`BipartiteGraph::edges`].
pub type EdgeId = usize;

/// Identifier of a connected component of the weight-0 subgraph.
pub type PieceId = u32;

/// Part of the bipartition a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: u8,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge #{index} ({a}, {b}) is out of range for a {n_a} x {n_b} graph")]
    IndexOutOfRange {
        index: usize,
        a: usize,
        b: usize,
        n_a: usize,
        n_b: usize,
    },
    #[error("edge #{index} ({a}, {b}) has weight {weight}, expected 0 or 1")]
    InvalidWeight {
        index: usize,
        a: usize,
        b: usize,
        weight: u64,
    },
    #[error("edge #{index} ({a}, {b}) duplicates edge #{first}")]
    DuplicateEdge {
        index: usize,
        first: usize,
        a: usize,
        b: usize,
    },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// An internal invariant of the matcher failed. These are bugs, never input errors.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("edge #{edge} has negative slack {slack}")]
    NegativeSlack { edge: EdgeId, slack: i64 },
    #[error("path is not an augmenting path: {0}")]
    NotAugmenting(String),
    #[error("path edge #{edge} is not admissible (slack {slack})")]
    NotAdmissible { edge: EdgeId, slack: i64 },
    #[error("{0}")]
    Other(String),
}

/// Bipartite graph over parts `A = 0..n_a` and `B = 0..n_b` with 0/1 edge weights.
///
/// Vertices are also addressed by a unified index: A-vertex `i` is `i`, and
/// B-vertex `j` is `n_a + j`. Matching state and residual views use the
/// unified index throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_a: usize,
    n_b: usize,
    edges: Vec<Edge>,
    adj_a: Vec<Vec<EdgeId>>,
    adj_b: Vec<Vec<EdgeId>>,
    coords: Option<Vec<(i64, i64)>>,
}

impl BipartiteGraph {
    /// Builds the graph, rejecting out-of-range endpoints, weights outside
    /// {0, 1} and duplicate edges. Adjacency order is input order.
    pub fn new<I>(n_a: usize, n_b: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut list = Vec::new();
        let mut adj_a = vec![Vec::new(); n_a];
        let mut adj_b = vec![Vec::new(); n_b];
        for (index, (a, b, weight)) in edges.into_iter().enumerate() {
            if a >= n_a || b >= n_b {
                return Err(GraphError::IndexOutOfRange { index, a, b, n_a, n_b });
            }
            if weight > 1 {
                return Err(GraphError::InvalidWeight { index, a, b, weight });
            }
            if let Some(&first) = seen.get(&(a, b)) {
                return Err(GraphError::DuplicateEdge { index, first, a, b });
            }
            seen.insert((a, b), index);
            adj_a[a].push(index);
            adj_b[b].push(index);
            list.push(Edge {
                a,
                b,
                weight: weight as u8,
            });
        }
        Ok(BipartiteGraph {
            n_a,
            n_b,
            edges: list,
            adj_a,
            adj_b,
            coords: None,
        })
    }

    /// Attaches 2D lattice coordinates, one per unified vertex.
    pub fn with_coordinates(mut self, coords: Vec<(i64, i64)>) -> Result<Self, GraphError> {
        if coords.len() != self.vertex_count() {
            return Err(GraphError::LengthMismatch {
                expected: self.vertex_count(),
                got: coords.len(),
            });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// Same topology with replaced edge weights.
    pub fn reweighted(&self, weights: &[u8]) -> Result<Self, GraphError> {
        if weights.len() != self.edges.len() {
            return Err(GraphError::LengthMismatch {
                expected: self.edges.len(),
                got: weights.len(),
            });
        }
        let mut out = self.clone();
        for (index, (edge, &w)) in out.edges.iter_mut().zip(weights).enumerate() {
            if w > 1 {
                return Err(GraphError::InvalidWeight {
                    index,
                    a: edge.a,
                    b: edge.b,
                    weight: w as u64,
                });
            }
            edge.weight = w;
        }
        Ok(out)
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn vertex_count(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn weight(&self, e: EdgeId) -> u8 {
        self.edges[e].weight
    }

    pub fn adj_a(&self, a: usize) -> &[EdgeId] {
        &self.adj_a[a]
    }

    pub fn adj_b(&self, b: usize) -> &[EdgeId] {
        &self.adj_b[b]
    }

    pub fn coordinates(&self) -> Option<&[(i64, i64)]> {
        self.coords.as_deref()
    }

    /// Unified index of B-vertex `b`.
    pub fn b_vertex(&self, b: usize) -> usize {
        self.n_a + b
    }

    pub fn side(&self, v: usize) -> Side {
        if v < self.n_a {
            Side::A
        } else {
            Side::B
        }
    }

    /// Edges incident to unified vertex `v`, in adjacency order.
    pub fn incident(&self, v: usize) -> &[EdgeId] {
        if v < self.n_a {
            &self.adj_a[v]
        } else {
            &self.adj_b[v - self.n_a]
        }
    }

    /// Unified endpoints `(a, b)` of an edge.
    pub fn endpoints(&self, e: EdgeId) -> (usize, usize) {
        let edge = self.edges[e];
        (edge.a, self.n_a + edge.b)
    }

    /// The endpoint of `e` that is not `v` (unified indices).
    pub fn opposite(&self, e: EdgeId, v: usize) -> usize {
        let (a, b) = self.endpoints(e);
        if v == a {
            b
        } else {
            a
        }
    }
}

/// Connected components of the weight-0 subgraph.
///
/// Vertices without any weight-0 edge form singleton pieces, so
/// `vertex_piece` is total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceDecomposition {
    pub piece_count: usize,
    pub vertex_piece: Vec<PieceId>,
    pub edge_piece: Vec<Option<PieceId>>,
    pub piece_vertices: Vec<usize>,
    pub piece_edges: Vec<usize>,
    pub max_piece_vertices: usize,
    pub max_piece_edges: usize,
}

impl PieceDecomposition {
    pub fn piece_of_vertex(&self, v: usize) -> PieceId {
        self.vertex_piece[v]
    }

    pub fn piece_of_edge(&self, e: EdgeId) -> Option<PieceId> {
        self.edge_piece[e]
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Union-find over weight-0 edges. Piece ids are assigned in order of each
/// piece's smallest unified vertex.
pub fn compute_pieces(graph: &BipartiteGraph) -> PieceDecomposition {
    let n = graph.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    for (e, edge) in graph.edges().iter().enumerate() {
        if edge.weight == 0 {
            let (a, b) = graph.endpoints(e);
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut root_piece: Vec<Option<PieceId>> = vec![None; n];
    let mut vertex_piece = vec![0; n];
    let mut piece_vertices = Vec::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        let id = match root_piece[r] {
            Some(id) => id,
            None => {
                let id = piece_vertices.len() as PieceId;
                root_piece[r] = Some(id);
                piece_vertices.push(0);
                id
            }
        };
        vertex_piece[v] = id;
        piece_vertices[id as usize] += 1;
    }
    let mut piece_edges = vec![0; piece_vertices.len()];
    let edge_piece = graph
        .edges()
        .iter()
        .map(|edge| {
            (edge.weight == 0).then(|| {
                let p = vertex_piece[edge.a];
                piece_edges[p as usize] += 1;
                p
            })
        })
        .collect();
    PieceDecomposition {
        piece_count: piece_vertices.len(),
        max_piece_vertices: piece_vertices.iter().copied().max().unwrap_or(0),
        max_piece_edges: piece_edges.iter().copied().max().unwrap_or(0),
        vertex_piece,
        edge_piece,
        piece_vertices,
        piece_edges,
    }
}

/// Matching, integer duals and per-phase deletion stamps for one matcher run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchState {
    mate: Vec<Option<EdgeId>>,
    dual: Vec<i64>,
    deleted_epoch: Vec<u32>,
    phase: u32,
    size: usize,
}

impl MatchState {
    /// Empty matching, all duals 0, phase 0.
    pub fn new(graph: &BipartiteGraph) -> Self {
        MatchState {
            mate: vec![None; graph.vertex_count()],
            dual: vec![0; graph.vertex_count()],
            deleted_epoch: vec![0; graph.edge_count()],
            phase: 0,
            size: 0,
        }
    }

    /// State holding the given matching edges with all duals 0.
    ///
    /// Panics if the edges are not vertex-disjoint.
    pub fn with_matching(graph: &BipartiteGraph, edges: &[EdgeId]) -> Self {
        let mut state = Self::new(graph);
        for &e in edges {
            let (a, b) = graph.endpoints(e);
            assert!(
                state.mate[a].is_none() && state.mate[b].is_none(),
                "matching edges share an endpoint"
            );
            state.mate[a] = Some(e);
            state.mate[b] = Some(e);
            state.size += 1;
        }
        state
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn mate_edge(&self, v: usize) -> Option<EdgeId> {
        self.mate[v]
    }

    pub fn partner(&self, graph: &BipartiteGraph, v: usize) -> Option<usize> {
        self.mate[v].map(|e| graph.opposite(e, v))
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.mate[v].is_none()
    }

    pub fn is_matched_edge(&self, graph: &BipartiteGraph, e: EdgeId) -> bool {
        self.mate[graph.edge(e).a] == Some(e)
    }

    pub fn dual(&self, v: usize) -> i64 {
        self.dual[v]
    }

    pub fn duals(&self) -> &[i64] {
        &self.dual
    }

    pub fn set_dual(&mut self, v: usize, y: i64) {
        self.dual[v] = y;
    }

    pub fn add_dual(&mut self, v: usize, delta: i64) {
        self.dual[v] += delta;
    }

    /// Matching edges in increasing edge order.
    pub fn matching_edges(&self, graph: &BipartiteGraph) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = (0..graph.n_a()).filter_map(|a| self.mate[a]).collect();
        out.sort_unstable();
        out
    }

    pub fn matching_weight(&self, graph: &BipartiteGraph) -> u64 {
        (0..graph.n_a())
            .filter_map(|a| self.mate[a])
            .map(|e| graph.weight(e) as u64)
            .sum()
    }

    /// `max_{b in B} y(b)`; `None` when B is empty.
    pub fn y_max(&self, graph: &BipartiteGraph) -> Option<i64> {
        self.dual[graph.n_a()..].iter().copied().max()
    }

    pub fn free_a(&self, graph: &BipartiteGraph) -> impl Iterator<Item = usize> + '_ {
        (0..graph.n_a()).filter(move |&a| self.mate[a].is_none())
    }

    pub fn free_b(&self, graph: &BipartiteGraph) -> impl Iterator<Item = usize> + '_ {
        (graph.n_a()..graph.vertex_count()).filter(move |&b| self.mate[b].is_none())
    }

    /// Slack `c(a,b) + y(a) - y(b)` of a non-matching edge, 0 for matching
    /// edges. Not checked for sign.
    pub fn raw_slack(&self, graph: &BipartiteGraph, e: EdgeId) -> i64 {
        if self.is_matched_edge(graph, e) {
            return 0;
        }
        let (a, b) = graph.endpoints(e);
        graph.weight(e) as i64 + self.dual[a] - self.dual[b]
    }

    /// Slack of a residual edge; a negative value means feasibility was lost.
    pub fn slack(&self, graph: &BipartiteGraph, e: EdgeId) -> Result<u64, InvariantError> {
        let s = self.raw_slack(graph, e);
        if s < 0 {
            Err(InvariantError::NegativeSlack { edge: e, slack: s })
        } else {
            Ok(s as u64)
        }
    }

    pub fn begin_phase(&mut self) -> u32 {
        self.phase += 1;
        self.phase
    }

    /// Whether `e` was deleted during the current phase.
    pub fn is_deleted(&self, e: EdgeId) -> bool {
        self.phase > 0 && self.deleted_epoch[e] == self.phase
    }

    pub fn delete(&mut self, e: EdgeId) {
        self.deleted_epoch[e] = self.phase;
    }

    /// Flips the matching along `path` (edge ids from the B end to the A end,
    /// alternating non-matching / matching). Duals are not touched.
    pub(crate) fn flip(&mut self, graph: &BipartiteGraph, path: &[EdgeId]) {
        for (i, &e) in path.iter().enumerate() {
            if i % 2 == 0 {
                let (a, b) = graph.endpoints(e);
                self.mate[a] = Some(e);
                self.mate[b] = Some(e);
            }
        }
        self.size += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// `y(b) - y(a) > c(a,b)` on a non-matching edge.
    NonMatchingSlack,
    /// `y(a) - y(b) != c(a,b)` on a matching edge.
    MatchingEquality,
    /// Mate pointers are not an involution across the parts.
    MateMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub edge: EdgeId,
    pub kind: ViolationKind,
    pub dual_a: i64,
    pub dual_b: i64,
    pub weight: u8,
}

/// Lists every edge violating the feasibility conditions; empty iff feasible.
pub fn check_feasibility(graph: &BipartiteGraph, state: &MatchState) -> Vec<Violation> {
    let mut out = Vec::new();
    for (e, edge) in graph.edges().iter().enumerate() {
        let (a, b) = graph.endpoints(e);
        let (ya, yb) = (state.dual(a), state.dual(b));
        let c = edge.weight as i64;
        let ma = state.mate_edge(a) == Some(e);
        let mb = state.mate_edge(b) == Some(e);
        let record = |kind| Violation {
            edge: e,
            kind,
            dual_a: ya,
            dual_b: yb,
            weight: edge.weight,
        };
        if ma != mb {
            out.push(record(ViolationKind::MateMismatch));
        } else if ma {
            if ya - yb != c {
                out.push(record(ViolationKind::MatchingEquality));
            }
        } else if yb - ya > c {
            out.push(record(ViolationKind::NonMatchingSlack));
        }
    }
    for v in 0..graph.vertex_count() {
        if let Some(e) = state.mate_edge(v) {
            if !graph.incident(v).contains(&e) {
                out.push(Violation {
                    edge: e,
                    kind: ViolationKind::MateMismatch,
                    dual_a: 0,
                    dual_b: 0,
                    weight: graph.weight(e),
                });
            }
        }
    }
    out
}

/// Directed residual network over a graph and a matching state: non-matching
/// edges point b -> a, matching edges a -> b, each weighted by its slack.
#[derive(Clone, Copy)]
pub struct ResidualView<'a> {
    pub graph: &'a BipartiteGraph,
    pub state: &'a MatchState,
}

impl<'a> ResidualView<'a> {
    pub fn new(graph: &'a BipartiteGraph, state: &'a MatchState) -> Self {
        ResidualView { graph, state }
    }

    /// Outgoing residual arcs `(edge, head, slack)` of unified vertex `v`.
    pub fn out_arcs(&self, v: usize) -> impl Iterator<Item = (EdgeId, usize, i64)> + 'a {
        let graph = self.graph;
        let state = self.state;
        let is_a = v < graph.n_a();
        let mate = state.mate_edge(v);
        let matched = if is_a { mate } else { None };
        let incident: &'a [EdgeId] = if is_a { &[] } else { graph.incident(v) };
        let forward = matched.into_iter().map(move |e| (e, graph.opposite(e, v), 0));
        let backward = incident
            .iter()
            .filter(move |&&e| Some(e) != mate)
            .map(move |&e| (e, graph.opposite(e, v), state.raw_slack(graph, e)));
        forward.chain(backward)
    }

    /// Free B-vertices, the targets of the source's 0-weight arcs.
    pub fn sources(&self) -> impl Iterator<Item = usize> + 'a {
        self.state.free_b(self.graph)
    }
}
