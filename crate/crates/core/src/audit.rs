//! Invariant checks over matcher states, usable as a [`PhaseObserver`].

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::geo::compact::max_dual_spread;
use crate::geo::{GeoObserver, GeoStage, GeoView};
use crate::graph::{check_feasibility, BipartiteGraph, EdgeId, MatchState, PieceDecomposition, ResidualView};
use crate::matcher::{is_perfect, PhaseObserver, PhaseStats};

/// Whether some zero-slack residual path leads from a free B-vertex to a free
/// A-vertex. Deletion stamps are ignored.
pub fn admissible_path_exists(graph: &BipartiteGraph, state: &MatchState) -> bool {
    let view = ResidualView::new(graph, state);
    let mut seen = vec![false; graph.vertex_count()];
    let mut queue: VecDeque<usize> = view.sources().collect();
    for &s in &queue {
        seen[s] = true;
    }
    while let Some(v) = queue.pop_front() {
        if v < graph.n_a() && state.is_free(v) {
            return true;
        }
        for (_, head, slack) in view.out_arcs(v) {
            if slack == 0 && !seen[head] {
                seen[head] = true;
                queue.push_back(head);
            }
        }
    }
    false
}

/// A weight-1 zero-slack residual edge lying on a directed cycle of
/// zero-slack edges, if any.
pub fn admissible_unit_cycle(graph: &BipartiteGraph, state: &MatchState) -> Option<EdgeId> {
    let view = ResidualView::new(graph, state);
    let mut dg: DiGraph<(), EdgeId> = DiGraph::with_capacity(graph.vertex_count(), graph.edge_count());
    for _ in 0..graph.vertex_count() {
        dg.add_node(());
    }
    for v in 0..graph.vertex_count() {
        for (e, head, slack) in view.out_arcs(v) {
            if slack == 0 {
                dg.add_edge(NodeIndex::new(v), NodeIndex::new(head), e);
            }
        }
    }
    let mut component = vec![0usize; graph.vertex_count()];
    for (i, scc) in tarjan_scc(&dg).into_iter().enumerate() {
        for node in scc {
            component[node.index()] = i;
        }
    }
    dg.raw_edges().iter().find_map(|arc| {
        let e = arc.weight;
        let same = component[arc.source().index()] == component[arc.target().index()];
        (same && graph.weight(e) == 1).then_some(e)
    })
}

/// Free B-vertices must share the largest B dual and free A-vertices have dual 0.
pub fn free_dual_violations(graph: &BipartiteGraph, state: &MatchState) -> Vec<String> {
    let mut out = Vec::new();
    let y_max = state.y_max(graph).unwrap_or(0);
    for b in state.free_b(graph) {
        if state.dual(b) != y_max {
            out.push(format!("free B-vertex {} has dual {} != {}", b - graph.n_a(), state.dual(b), y_max));
        }
    }
    for a in state.free_a(graph) {
        if state.dual(a) != 0 {
            out.push(format!("free A-vertex {a} has dual {}", state.dual(a)));
        }
    }
    out
}

/// Violations grouped by the property they break.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub states_checked: usize,
    pub feasibility: Vec<String>,
    pub free_duals: Vec<String>,
    pub matched_distances: Vec<String>,
    pub missing_admissible_path: Vec<String>,
    pub admissible_cycles: Vec<String>,
    pub not_exhausted: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.feasibility.is_empty()
            && self.free_duals.is_empty()
            && self.matched_distances.is_empty()
            && self.missing_admissible_path.is_empty()
            && self.admissible_cycles.is_empty()
            && self.not_exhausted.is_empty()
    }
}

/// Observer running the state checks at every hook.
///
/// The cycle check builds a digraph per state and is off by default.
#[derive(Debug, Clone, Default)]
pub struct InvariantAudit {
    pub check_cycles: bool,
    pub report: AuditReport,
}

impl InvariantAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cycle_check() -> Self {
        InvariantAudit {
            check_cycles: true,
            ..Self::default()
        }
    }

    fn common(&mut self, graph: &BipartiteGraph, state: &MatchState, at: &str) {
        self.report.states_checked += 1;
        for v in check_feasibility(graph, state) {
            self.report.feasibility.push(format!("{at}: {v:?}"));
        }
        for v in free_dual_violations(graph, state) {
            self.report.free_duals.push(format!("{at}: {v}"));
        }
        if self.check_cycles {
            if let Some(e) = admissible_unit_cycle(graph, state) {
                self.report
                    .admissible_cycles
                    .push(format!("{at}: weight-1 edge {e} closes an admissible cycle"));
            }
        }
    }
}

impl PhaseObserver for InvariantAudit {
    fn after_preprocess(&mut self, graph: &BipartiteGraph, _pieces: &PieceDecomposition, state: &MatchState) {
        self.common(graph, state, "preprocess");
    }

    fn after_stage1(&mut self, graph: &BipartiteGraph, state: &MatchState, dist: &[u32], _ell: u32) {
        let at = format!("phase {} stage 1", state.phase() + 1);
        self.common(graph, state, &at);
        for a in 0..graph.n_a() {
            if let Some(b) = state.partner(graph, a) {
                if dist[a] != dist[b] {
                    self.report
                        .matched_distances
                        .push(format!("{at}: matched pair ({a}, {}) at distances {} / {}", b - graph.n_a(), dist[a], dist[b]));
                }
            }
        }
        if !admissible_path_exists(graph, state) {
            self.report
                .missing_admissible_path
                .push(format!("{at}: no admissible augmenting path"));
        }
    }

    fn after_augment(&mut self, graph: &BipartiteGraph, state: &MatchState, _path: &[EdgeId]) {
        let at = format!("phase {} augmentation", state.phase());
        self.common(graph, state, &at);
    }

    fn after_stage2(&mut self, graph: &BipartiteGraph, state: &MatchState, stats: &PhaseStats) {
        let at = format!("phase {} stage 2", stats.phase);
        self.common(graph, state, &at);
        if !is_perfect(graph, state) && admissible_path_exists(graph, state) {
            self.report
                .not_exhausted
                .push(format!("{at}: an admissible augmenting path remains"));
        }
    }
}

/// Geometric counterpart of [`InvariantAudit`]: feasibility everywhere,
/// and at exposed states the free-dual rule, dual spread at most 2 and at
/// most 3 clusters per cell side. After stage 2 the admissible graph must
/// hold no augmenting path.
#[derive(Debug, Clone, Default)]
pub struct GeoAudit {
    pub report: AuditReport,
    pub spread: Vec<String>,
    pub clusters: Vec<String>,
    pub max_spread: i64,
    pub max_clusters: usize,
}

impl GeoAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_clean(&self) -> bool {
        self.report.is_clean() && self.spread.is_empty() && self.clusters.is_empty()
    }
}

impl GeoObserver for GeoAudit {
    fn observe(&mut self, stage: GeoStage, view: &GeoView<'_>) {
        let at = format!("delta {} {stage:?}", view.grid.delta);
        self.report.states_checked += 1;
        for v in check_feasibility(view.graph, view.state) {
            self.report.feasibility.push(format!("{at}: {v:?}"));
        }
        if !stage.is_exposed() {
            return;
        }
        for v in free_dual_violations(view.graph, view.state) {
            self.report.free_duals.push(format!("{at}: {v}"));
        }
        let spread = max_dual_spread(view.grid, view.graph, view.state);
        self.max_spread = self.max_spread.max(spread);
        if spread > 2 {
            self.spread.push(format!("{at}: dual spread {spread}"));
        }
        let clusters = view.compact.max_clusters_per_cell();
        self.max_clusters = self.max_clusters.max(clusters);
        if clusters > 3 {
            self.clusters.push(format!("{at}: {clusters} clusters in one cell"));
        }
        if matches!(stage, GeoStage::Stage2 { .. })
            && view.state.size() < view.graph.n_a()
            && admissible_path_exists(view.graph, view.state)
        {
            self.report
                .not_exhausted
                .push(format!("{at}: an admissible augmenting path remains"));
        }
    }
}
