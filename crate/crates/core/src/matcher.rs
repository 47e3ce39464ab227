//! The 0/1-weighted primal-dual phase matcher.
//!
//! After a per-piece maximum matching, each phase runs a Dijkstra dual
//! adjustment (stage 1) and then a DFS from every free B-vertex over the
//! admissible graph (stage 2). A DFS that finds nothing deletes every edge it
//! visited; one that augments deletes only visited edges outside the pieces
//! its path touched.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::baseline::hopcroft_karp;
use crate::dfs::{self, DfsNetwork, DfsOutcome, Marking};
use crate::dial::{self, INFINITE};
use crate::graph::{BipartiteGraph, EdgeId, InvariantError, MatchState, PieceDecomposition, PieceId, ResidualView};

/// Per-phase counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub phase: u32,
    /// Stage-1 threshold: the distance of the nearest free A-vertex.
    pub ell: u32,
    pub augmenting_paths: usize,
    /// Sum over this phase's paths of the number of affected pieces.
    pub affected_pieces: usize,
    /// `c(P)` of each path in discovery order.
    pub path_weights: Vec<u64>,
    /// Number of affected pieces of each path in discovery order.
    pub path_pieces: Vec<usize>,
    /// Common dual of the free B-vertices after stage 1.
    pub y_max: i64,
    pub deleted_edges: usize,
}

/// Checks of the phase-count and path-weight bounds for one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundLedger {
    /// Largest weight of any matching held during the run.
    pub w: u64,
    /// `3 * ceil(sqrt(w))`.
    pub phase_limit: u64,
    pub phases: u64,
    /// Global indices `l` (1-based) with `c(P_l) * (t - l + 1) > 2w`.
    pub path_weight_excess: Vec<usize>,
    pub total_affected: u64,
    pub total_path_weight: u64,
    /// Paths with `c(P) + 1` affected pieces: a path with `c` weight-1 edges
    /// has `c + 1` weight-0 runs, so this is attainable and not fatal.
    pub warnings: Vec<String>,
    /// Failed per-phase invariants (free-B dual equals path cost, dual growth,
    /// at least one augmentation per phase, at most `c(P) + 1` affected
    /// pieces per path).
    pub violations: Vec<String>,
}

impl BoundLedger {
    pub fn phases_within_limit(&self) -> bool {
        self.phases <= self.phase_limit
    }

    pub fn path_weights_within_limit(&self) -> bool {
        self.path_weight_excess.is_empty()
    }

    pub fn affected_within_limit(&self) -> bool {
        self.total_affected <= self.total_path_weight
    }

    pub fn holds(&self) -> bool {
        self.phases_within_limit()
            && self.path_weights_within_limit()
            && self.affected_within_limit()
            && self.violations.is_empty()
    }

    /// Fills the derived fields from the completed phases.
    pub fn evaluate(&mut self, phases: &[PhaseStats]) {
        self.phases = phases.len() as u64;
        self.phase_limit = 3 * ceil_sqrt(self.w);
        let weights: Vec<u64> = phases.iter().flat_map(|p| p.path_weights.iter().copied()).collect();
        let pieces: Vec<usize> = phases.iter().flat_map(|p| p.path_pieces.iter().copied()).collect();
        let t = weights.len();
        self.path_weight_excess = weights
            .iter()
            .enumerate()
            .filter(|&(i, &c)| c * (t - i) as u64 > 2 * self.w)
            .map(|(i, _)| i + 1)
            .collect();
        for (i, (&c, &k)) in weights.iter().zip(&pieces).enumerate() {
            if k as u64 > c + 1 {
                self.violations
                    .push(format!("path {} has {} affected pieces but weight {}", i + 1, k, c));
            } else if k as u64 > c {
                self.warnings
                    .push(format!("path {} has {} affected pieces but weight {}", i + 1, k, c));
            }
        }
        self.total_affected = pieces.iter().map(|&k| k as u64).sum();
        self.total_path_weight = weights.iter().sum();
    }
}

/// Smallest `s` with `s * s >= x`.
pub fn ceil_sqrt(x: u64) -> u64 {
    let mut s = (x as f64).sqrt() as u64;
    while s * s < x {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= x {
        s -= 1;
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matching: Vec<EdgeId>,
    pub size: usize,
    pub preprocess_size: usize,
    /// Weight of the final matching.
    pub weight: u64,
    pub total_phases: usize,
    pub total_affected: usize,
    pub sum_path_weights: u64,
    pub duals: Vec<i64>,
    pub phases: Vec<PhaseStats>,
    pub ledger: BoundLedger,
}

/// Hooks into a matcher run. Every method sees the state between stages,
/// where feasibility must hold.
pub trait PhaseObserver {
    fn after_preprocess(&mut self, _graph: &BipartiteGraph, _pieces: &PieceDecomposition, _state: &MatchState) {}

    /// After the stage-1 dual update; `dist` holds the Dijkstra distances.
    fn after_stage1(&mut self, _graph: &BipartiteGraph, _state: &MatchState, _dist: &[u32], _ell: u32) {}

    /// After an augmentation along `path` (edge ids, B end first).
    fn after_augment(&mut self, _graph: &BipartiteGraph, _state: &MatchState, _path: &[EdgeId]) {}

    fn after_stage2(&mut self, _graph: &BipartiteGraph, _state: &MatchState, _stats: &PhaseStats) {}
}

/// Observer that does nothing.
pub struct NoObserver;

impl PhaseObserver for NoObserver {}

/// A maximum matching inside every piece, over weight-0 edges only. Duals are 0.
pub fn preprocess(graph: &BipartiteGraph, pieces: &PieceDecomposition) -> MatchState {
    // Weight-0 edges never cross pieces, so one run over all of them matches
    // every piece independently.
    let m = hopcroft_karp(graph, |e| pieces.piece_of_edge(e).is_some());
    MatchState::with_matching(graph, &m.edges())
}

/// What stage 1 decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage1 {
    /// No free vertex remains on one of the sides.
    Perfect,
    /// No free A-vertex is reachable; the matching is maximum.
    Exhausted,
    /// Duals were raised; `ell` is the threshold and `dist` the distances.
    Adjusted { ell: u32, dist: Vec<u32> },
}

/// Whether one side has no free vertex. With `n_a == n_b` this is a perfect matching.
pub fn is_perfect(graph: &BipartiteGraph, state: &MatchState) -> bool {
    state.size() == graph.n_a().min(graph.n_b())
}

/// Dijkstra from the free B-vertices; raises `y(v)` by `ell - dist(v)` for
/// every vertex closer than the nearest free A-vertex.
pub fn stage1_dijkstra(graph: &BipartiteGraph, state: &mut MatchState) -> Stage1 {
    if is_perfect(graph, state) {
        return Stage1::Perfect;
    }
    let dist = dial::dijkstra(&ResidualView::new(graph, state));
    let ell = state.free_a(graph).map(|a| dist[a]).min().unwrap_or(INFINITE);
    if ell == INFINITE {
        return Stage1::Exhausted;
    }
    for (v, &d) in dist.iter().enumerate() {
        if d < ell {
            state.add_dual(v, (ell - d) as i64);
        }
    }
    Stage1::Adjusted { ell, dist }
}

/// Validates `path` (edge ids from a free B-vertex to a free A-vertex,
/// alternating non-matching / matching, all slack 0), lowers `y(b)` by
/// `2 c(a, b)` on each non-matching edge and flips the matching.
pub fn augment(graph: &BipartiteGraph, state: &mut MatchState, path: &[EdgeId]) -> Result<(), InvariantError> {
    validate_path(graph, state, path)?;
    for &e in path.iter().step_by(2) {
        let (_, b) = graph.endpoints(e);
        state.add_dual(b, -2 * graph.weight(e) as i64);
    }
    state.flip(graph, path);
    Ok(())
}

fn validate_path(graph: &BipartiteGraph, state: &MatchState, path: &[EdgeId]) -> Result<(), InvariantError> {
    let bad = |msg: String| Err(InvariantError::NotAugmenting(msg));
    if path.len().is_multiple_of(2) {
        return bad(format!("path has even length {}", path.len()));
    }
    let (_, start) = graph.endpoints(path[0]);
    if !state.is_free(start) {
        return bad(format!("start vertex {start} is matched"));
    }
    let mut at = start;
    for (i, &e) in path.iter().enumerate() {
        if e >= graph.edge_count() {
            return bad(format!("edge {e} does not exist"));
        }
        let (a, b) = graph.endpoints(e);
        let expect_matched = i % 2 == 1;
        if state.is_matched_edge(graph, e) != expect_matched {
            return bad(format!("edge {e} at position {i} breaks alternation"));
        }
        let (tail, head) = if expect_matched { (a, b) } else { (b, a) };
        if tail != at {
            return bad(format!("edge {e} does not continue the path at vertex {at}"));
        }
        let slack = state.raw_slack(graph, e);
        if slack != 0 {
            return Err(InvariantError::NotAdmissible { edge: e, slack });
        }
        at = head;
    }
    if !state.is_free(at) {
        return bad(format!("end vertex {at} is matched"));
    }
    Ok(())
}

/// Admissible, non-deleted residual arcs.
struct Admissible<'a> {
    graph: &'a BipartiteGraph,
    state: &'a MatchState,
}

impl DfsNetwork for Admissible<'_> {
    type Arc = EdgeId;

    fn out_arcs(&self, v: usize, out: &mut Vec<(EdgeId, usize)>) {
        let view = ResidualView::new(self.graph, self.state);
        out.extend(
            view.out_arcs(v)
                .filter(|&(e, _, slack)| slack == 0 && !self.state.is_deleted(e))
                .map(|(e, head, _)| (e, head)),
        );
    }

    fn is_target(&self, v: usize) -> bool {
        v < self.graph.n_a() && self.state.is_free(v)
    }
}

/// Pieces of the weight-0 edges of a path.
pub fn affected_pieces(pieces: &PieceDecomposition, path: &[EdgeId]) -> BTreeSet<PieceId> {
    path.iter().filter_map(|&e| pieces.piece_of_edge(e)).collect()
}

/// One DFS per free B-vertex over the admissible graph, augmenting on success.
pub fn stage2_dfs(
    graph: &BipartiteGraph,
    state: &mut MatchState,
    pieces: &PieceDecomposition,
    ell: u32,
    observer: &mut dyn PhaseObserver,
) -> Result<PhaseStats, InvariantError> {
    let phase = state.begin_phase();
    let y_max = state.y_max(graph).unwrap_or(0);
    let mut stats = PhaseStats {
        phase,
        ell,
        augmenting_paths: 0,
        affected_pieces: 0,
        path_weights: Vec::new(),
        path_pieces: Vec::new(),
        y_max,
        deleted_edges: 0,
    };
    let roots: Vec<usize> = state.free_b(graph).collect();
    for root in roots {
        let outcome = dfs::search(&Admissible { graph, state }, root, Marking::OnTraverse);
        match outcome {
            DfsOutcome::Failed { visited } => {
                for e in visited {
                    state.delete(e);
                    stats.deleted_edges += 1;
                }
            }
            DfsOutcome::Found { arcs, visited, .. } => {
                let cost: u64 = arcs.iter().map(|&e| graph.weight(e) as u64).sum();
                let affected = affected_pieces(pieces, &arcs);
                stats.path_weights.push(cost);
                stats.path_pieces.push(affected.len());
                stats.affected_pieces += affected.len();
                stats.augmenting_paths += 1;
                augment(graph, state, &arcs)?;
                observer.after_augment(graph, state, &arcs);
                for e in visited {
                    let keep = pieces.piece_of_edge(e).is_some_and(|p| affected.contains(&p));
                    if !keep {
                        state.delete(e);
                        stats.deleted_edges += 1;
                    }
                }
            }
        }
    }
    Ok(stats)
}

/// Runs the matcher to completion.
pub fn run_matcher(graph: &BipartiteGraph) -> MatchResult {
    run_matcher_with(graph, &mut NoObserver).expect("matcher invariant failed")
}

pub fn run_matcher_with(graph: &BipartiteGraph, observer: &mut dyn PhaseObserver) -> Result<MatchResult, InvariantError> {
    let pieces = crate::graph::compute_pieces(graph);
    run_with_pieces(graph, &pieces, observer)
}

pub fn run_with_pieces(
    graph: &BipartiteGraph,
    pieces: &PieceDecomposition,
    observer: &mut dyn PhaseObserver,
) -> Result<MatchResult, InvariantError> {
    let mut state = preprocess(graph, pieces);
    observer.after_preprocess(graph, pieces, &state);
    let preprocess_size = state.size();
    let mut ledger = BoundLedger {
        w: state.matching_weight(graph),
        ..BoundLedger::default()
    };
    let mut phases = Vec::new();
    let mut last_y_max = state.y_max(graph).unwrap_or(0);
    loop {
        let ell = match stage1_dijkstra(graph, &mut state) {
            Stage1::Perfect | Stage1::Exhausted => break,
            Stage1::Adjusted { ell, dist } => {
                observer.after_stage1(graph, &state, &dist, ell);
                ell
            }
        };
        let y_max = state.y_max(graph).unwrap_or(0);
        if y_max < last_y_max + 1 {
            ledger
                .violations
                .push(format!("free-B dual rose from {last_y_max} to only {y_max}"));
        }
        last_y_max = y_max;
        let stats = stage2_dfs(graph, &mut state, pieces, ell, observer)?;
        for (i, &c) in stats.path_weights.iter().enumerate() {
            if c as i64 != y_max {
                ledger.violations.push(format!(
                    "phase {} path {} has cost {} but free-B dual {}",
                    stats.phase,
                    i + 1,
                    c,
                    y_max
                ));
            }
        }
        if stats.augmenting_paths == 0 {
            ledger
                .violations
                .push(format!("phase {} found no augmenting path", stats.phase));
        }
        ledger.w = ledger.w.max(state.matching_weight(graph));
        observer.after_stage2(graph, &state, &stats);
        phases.push(stats);
        if phases.last().unwrap().augmenting_paths == 0 {
            break;
        }
    }
    ledger.evaluate(&phases);
    for warning in &ledger.warnings {
        log::warn!("{warning}");
    }
    let matching = state.matching_edges(graph);
    Ok(MatchResult {
        size: matching.len(),
        weight: state.matching_weight(graph),
        matching,
        preprocess_size,
        total_phases: phases.len(),
        total_affected: phases.iter().map(|p| p.affected_pieces).sum(),
        sum_path_weights: phases.iter().flat_map(|p| p.path_weights.iter()).sum(),
        duals: state.duals().to_vec(),
        phases,
        ledger,
    })
}
