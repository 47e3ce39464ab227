//! Phase matcher on the compact network and the δ-ladder driver.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::compact::{check_spread, ClusterId, CompactDfs, CompactResidual};
use super::grid::{build_grid, default_r, GridIndex};
use super::{delta_candidates, matching_bottleneck, GeoError, PointSet};
use crate::baseline::hopcroft_karp;
use crate::dfs::{self, DfsOutcome, Marking};
use crate::dial::INFINITE;
use crate::graph::{BipartiteGraph, EdgeId, InvariantError, MatchState, Side};
use crate::matcher::{augment, BoundLedger, NoObserver, PhaseStats};

/// Where in a run a state is exposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeoStage {
    Preprocess,
    Stage1 { phase: u32 },
    /// Mid-stage-2; only feasibility is promised here.
    Augment { phase: u32 },
    Stage2 { phase: u32 },
}

impl GeoStage {
    /// Between stages, where every invariant must hold.
    pub fn is_exposed(&self) -> bool {
        !matches!(self, GeoStage::Augment { .. })
    }
}

/// Read-only snapshot handed to a [`GeoObserver`].
pub struct GeoView<'a> {
    pub points: &'a PointSet,
    pub grid: &'a GridIndex,
    /// Point-level graph: A-point `i` is vertex `i`, B-point `j` is `n + j`.
    pub graph: &'a BipartiteGraph,
    pub state: &'a MatchState,
    pub compact: &'a CompactResidual,
}

pub trait GeoObserver {
    fn observe(&mut self, _stage: GeoStage, _view: &GeoView<'_>) {}
}

impl GeoObserver for NoObserver {}

/// Outcome of one ladder rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoRun {
    pub delta: f64,
    pub r: usize,
    pub perfect: bool,
    /// Matched `(a, b)` pairs, perfect or not.
    pub pairs: Vec<(usize, usize)>,
    /// Longest matched edge, when perfect.
    pub bottleneck: Option<f64>,
    pub preprocess_size: usize,
    pub cells: usize,
    pub boundary_points: usize,
    pub edges: usize,
    pub phases: Vec<PhaseStats>,
    pub ledger: BoundLedger,
}

/// A maximum matching over weight-0 edges, i.e. inside every box. Duals 0.
pub fn geo_preprocess(graph: &BipartiteGraph) -> MatchState {
    let m = hopcroft_karp(graph, |e| graph.weight(e) == 0);
    MatchState::with_matching(graph, &m.edges())
}

pub fn geo_match(points: &PointSet, delta: f64, epsilon: f64, r: usize) -> Result<GeoRun, GeoError> {
    geo_match_with(points, delta, epsilon, r, &mut NoObserver)
}

struct Run<'a> {
    points: &'a PointSet,
    grid: GridIndex,
    graph: BipartiteGraph,
    edge_of: HashMap<(usize, usize), EdgeId>,
    state: MatchState,
    compact: CompactResidual,
}

impl Run<'_> {
    fn view(&self) -> GeoView<'_> {
        GeoView {
            points: self.points,
            grid: &self.grid,
            graph: &self.graph,
            state: &self.state,
            compact: &self.compact,
        }
    }

    fn n(&self) -> usize {
        self.graph.n_a()
    }

    /// Raises point duals from the compact distances. A-points share the
    /// distance of their cluster; a matched B-point inherits its mate's.
    fn stage1(&mut self) -> Option<u32> {
        let dist = self.compact.distances(&self.grid);
        let ell = (0..self.n())
            .filter(|&a| self.state.is_free(a))
            .map(|a| dist[self.compact.cluster_of_a(a)])
            .min()
            .unwrap_or(INFINITE);
        if ell == INFINITE {
            return None;
        }
        let point_dist: Vec<u32> = (0..self.graph.vertex_count())
            .map(|v| {
                if v < self.n() {
                    dist[self.compact.cluster_of_a(v)]
                } else {
                    match self.state.partner(&self.graph, v) {
                        None => 0,
                        Some(a) => dist[self.compact.cluster_of_a(a)],
                    }
                }
            })
            .collect();
        for (v, &d) in point_dist.iter().enumerate() {
            if d < ell {
                self.state.add_dual(v, (ell - d) as i64);
            }
        }
        self.compact = CompactResidual::build(&self.grid, &self.graph, &self.state);
        Some(ell)
    }

    /// Point-level augmenting path for a compact path `Y0, X1, Y1, ..., Xk`
    /// starting at free B-point `root`.
    fn project(&self, root: usize, clusters: &[ClusterId]) -> Result<Vec<EdgeId>, InvariantError> {
        let mut path = Vec::with_capacity(clusters.len() - 1);
        let mut b = root;
        let k = clusters.len() / 2;
        for i in 1..=k {
            let x = self.compact.cluster(clusters[2 * i - 1]);
            let a = if i < k {
                let y = clusters[2 * i];
                *x.matched_into()
                    .get(&y)
                    .and_then(|s| s.iter().next())
                    .ok_or_else(|| InvariantError::Other(format!("no matched pair behind arc {:?}", (clusters[2 * i - 1], y))))?
            } else {
                *x.members
                    .iter()
                    .find(|&&a| self.state.is_free(a))
                    .ok_or_else(|| InvariantError::Other("target cluster has no free point".into()))?
            };
            let e = *self
                .edge_of
                .get(&(a, b))
                .ok_or_else(|| InvariantError::Other(format!("points {a} and {b} are not joined")))?;
            path.push(e);
            if i < k {
                let m = self.state.mate_edge(a).expect("matched point");
                path.push(m);
                b = self.graph.edge(m).b;
            }
        }
        Ok(path)
    }

    fn path_points(&self, path: &[EdgeId]) -> (Vec<usize>, Vec<usize>) {
        let mut a_pts = Vec::new();
        let mut b_pts = Vec::new();
        for &e in path.iter().step_by(2) {
            let edge = self.graph.edge(e);
            a_pts.push(edge.a);
            b_pts.push(edge.b);
        }
        (a_pts, b_pts)
    }

    fn stage2(&mut self, ell: u32, y_max: i64, observer: &mut dyn GeoObserver) -> Result<PhaseStats, GeoError> {
        let phase = self.state.begin_phase();
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
        let mut deleted: HashSet<(ClusterId, ClusterId)> = HashSet::new();
        let roots: Vec<usize> = (0..self.n()).filter(|&j| self.state.is_free(self.graph.b_vertex(j))).collect();
        for root in roots {
            let start = self.compact.cluster_of_b(root);
            let outcome = dfs::search(
                &CompactDfs {
                    grid: &self.grid,
                    compact: &self.compact,
                    deleted: &deleted,
                },
                start,
                Marking::OnBacktrack,
            );
            match outcome {
                DfsOutcome::Failed { visited } => {
                    stats.deleted_edges += visited.len();
                    deleted.extend(visited);
                }
                DfsOutcome::Found { vertices, visited, .. } => {
                    let mut affected = BTreeSet::new();
                    for pair in vertices.windows(2) {
                        let (u, v) = (self.compact.cluster(pair[0]).key.cell, self.compact.cluster(pair[1]).key.cell);
                        if self.grid.weight(u, v) == 0 {
                            affected.insert(self.grid.cells[u].box_id);
                        }
                    }
                    let path = self.project(root, &vertices)?;
                    let cost: u64 = path.iter().map(|&e| self.graph.weight(e) as u64).sum();
                    stats.path_weights.push(cost);
                    stats.path_pieces.push(affected.len());
                    stats.affected_pieces += affected.len();
                    stats.augmenting_paths += 1;

                    let (a_pts, b_pts) = self.path_points(&path);
                    for &a in &a_pts {
                        self.compact.remove(&self.graph, &self.state, Side::A, a);
                    }
                    for &b in &b_pts {
                        self.compact.remove(&self.graph, &self.state, Side::B, b);
                    }
                    augment(&self.graph, &mut self.state, &path)?;
                    for &b in &b_pts {
                        self.compact.insert(&self.grid, &self.graph, &self.state, Side::B, b);
                    }
                    for &a in &a_pts {
                        self.compact.insert(&self.grid, &self.graph, &self.state, Side::A, a);
                    }
                    observer.observe(GeoStage::Augment { phase }, &self.view());

                    for (u, v) in visited {
                        let (cu, cv) = (self.compact.cluster(u).key.cell, self.compact.cluster(v).key.cell);
                        let keep = self.grid.weight(cu, cv) == 0 && affected.contains(&self.grid.cells[cu].box_id);
                        if !keep {
                            deleted.insert((u, v));
                            stats.deleted_edges += 1;
                        }
                    }
                }
            }
        }
        Ok(stats)
    }
}

/// Runs the phase matcher for one guess `delta > 0`.
pub fn geo_match_with(
    points: &PointSet,
    delta: f64,
    epsilon: f64,
    r: usize,
    observer: &mut dyn GeoObserver,
) -> Result<GeoRun, GeoError> {
    points.check_balanced()?;
    let grid = build_grid(points, delta, epsilon, r);
    let n = points.a.len();
    let graph = BipartiteGraph::new(n, n, grid.point_edges()).map_err(|e| InvariantError::Other(e.to_string()))?;
    let edge_of = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| ((edge.a, edge.b), e))
        .collect();
    let state = geo_preprocess(&graph);
    let compact = CompactResidual::build(&grid, &graph, &state);
    let mut run = Run {
        points,
        grid,
        graph,
        edge_of,
        state,
        compact,
    };
    let preprocess_size = run.state.size();
    check_spread(&run.grid, &run.graph, &run.state)?;
    observer.observe(GeoStage::Preprocess, &run.view());

    let mut ledger = BoundLedger {
        w: run.state.matching_weight(&run.graph),
        ..BoundLedger::default()
    };
    let mut phases: Vec<PhaseStats> = Vec::new();
    let mut last_y_max = 0;
    while run.state.size() < n {
        let Some(ell) = run.stage1() else { break };
        let phase = run.state.phase() + 1;
        check_spread(&run.grid, &run.graph, &run.state)?;
        observer.observe(GeoStage::Stage1 { phase }, &run.view());
        let y_max = run.state.y_max(&run.graph).unwrap_or(0);
        if y_max < last_y_max + 1 {
            ledger
                .violations
                .push(format!("free-B dual rose from {last_y_max} to only {y_max}"));
        }
        last_y_max = y_max;

        let stats = run.stage2(ell, y_max, observer)?;
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
        ledger.w = ledger.w.max(run.state.matching_weight(&run.graph));
        check_spread(&run.grid, &run.graph, &run.state)?;
        observer.observe(GeoStage::Stage2 { phase: stats.phase }, &run.view());
        let stalled = stats.augmenting_paths == 0;
        if stalled {
            ledger
                .violations
                .push(format!("phase {} found no augmenting path", stats.phase));
        }
        phases.push(stats);
        if stalled {
            break;
        }
    }
    ledger.evaluate(&phases);

    let pairs: Vec<(usize, usize)> = (0..n)
        .filter_map(|a| run.state.mate_edge(a).map(|e| (a, run.graph.edge(e).b)))
        .collect();
    let perfect = pairs.len() == n;
    Ok(GeoRun {
        delta,
        r,
        perfect,
        bottleneck: perfect.then(|| matching_bottleneck(points, &pairs)),
        pairs,
        preprocess_size,
        cells: run.grid.cells.len(),
        boundary_points: run.grid.boundary_points(),
        edges: run.graph.edge_count(),
        phases,
        ledger,
    })
}

/// How much of the ladder to run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderMode {
    /// Every rung; the best perfect rung wins.
    #[default]
    ScanAll,
    /// Stop at the lowest perfect rung. Perfection is monotone in δ, so every
    /// rung below it is already known to fail.
    FirstPerfect,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BottleneckOptions {
    /// Coarse-grid parameter; a perfect square. Defaults to [`default_r`].
    pub r: Option<usize>,
    pub mode: LadderMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungReport {
    pub delta: f64,
    pub perfect: bool,
    pub bottleneck: Option<f64>,
    pub phases: usize,
    pub total_affected: usize,
    pub sum_path_weights: u64,
    pub w: u64,
    pub preprocess_size: usize,
    pub boundary_points: usize,
    pub phases_within_limit: bool,
    pub path_weights_within_limit: bool,
    pub affected_within_limit: bool,
    pub violations: Vec<String>,
}

impl RungReport {
    pub fn ledger_holds(&self) -> bool {
        self.phases_within_limit && self.path_weights_within_limit && self.affected_within_limit && self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckResult {
    pub pairs: Vec<(usize, usize)>,
    pub bottleneck: f64,
    /// Guess of the winning rung.
    pub delta: f64,
    /// Index of the winning rung in `rungs`.
    pub rung: usize,
    pub epsilon: f64,
    pub r: usize,
    pub rungs: Vec<RungReport>,
}

pub fn bottleneck_match(points: &PointSet, epsilon: f64) -> Result<BottleneckResult, GeoError> {
    bottleneck_match_with(points, epsilon, BottleneckOptions::default(), &mut NoObserver)
}

/// Runs the ladder and returns the perfect matching with the smallest
/// realized bottleneck (lowest rung on ties).
pub fn bottleneck_match_with(
    points: &PointSet,
    epsilon: f64,
    options: BottleneckOptions,
    observer: &mut dyn GeoObserver,
) -> Result<BottleneckResult, GeoError> {
    points.check_balanced()?;
    points.check_finite()?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(GeoError::InvalidEpsilon(epsilon));
    }
    let n = points.a.len();
    let r = options.r.unwrap_or_else(|| default_r(n));
    let q = (r as f64).sqrt().round() as usize;
    if r == 0 || q * q != r {
        return Err(GeoError::InvalidR(r));
    }
    let mut rungs = Vec::new();
    // (bottleneck, rung index, pairs) of the best perfect rung so far.
    type Best = (f64, usize, Vec<(usize, usize)>);
    let mut best: Option<Best> = None;
    for delta in delta_candidates(points, epsilon) {
        let (report, pairs) = if delta == 0.0 {
            let pairs = points.coincident_matching();
            let report = RungReport {
                delta,
                perfect: pairs.is_some(),
                bottleneck: pairs.as_ref().map(|_| 0.0),
                phases: 0,
                total_affected: 0,
                sum_path_weights: 0,
                w: 0,
                preprocess_size: pairs.as_ref().map_or(0, Vec::len),
                boundary_points: 0,
                phases_within_limit: true,
                path_weights_within_limit: true,
                affected_within_limit: true,
                violations: Vec::new(),
            };
            (report, pairs)
        } else {
            let run = geo_match_with(points, delta, epsilon, r, observer)?;
            let report = RungReport {
                delta,
                perfect: run.perfect,
                bottleneck: run.bottleneck,
                phases: run.phases.len(),
                total_affected: run.phases.iter().map(|p| p.affected_pieces).sum(),
                sum_path_weights: run.ledger.total_path_weight,
                w: run.ledger.w,
                preprocess_size: run.preprocess_size,
                boundary_points: run.boundary_points,
                phases_within_limit: run.ledger.phases_within_limit(),
                path_weights_within_limit: run.ledger.path_weights_within_limit(),
                affected_within_limit: run.ledger.affected_within_limit(),
                violations: run.ledger.violations.clone(),
            };
            let pairs = run.perfect.then_some(run.pairs);
            (report, pairs)
        };
        let perfect = report.perfect;
        if let (Some(pairs), Some(value)) = (pairs, report.bottleneck) {
            if best.as_ref().is_none_or(|(v, _, _)| value < *v) {
                best = Some((value, rungs.len(), pairs));
            }
        }
        rungs.push(report);
        let exact = best.as_ref().is_some_and(|(v, _, _)| *v == 0.0);
        if exact || (perfect && options.mode == LadderMode::FirstPerfect) {
            break;
        }
    }
    match best {
        Some((bottleneck, rung, pairs)) => Ok(BottleneckResult {
            pairs,
            bottleneck,
            delta: rungs[rung].delta,
            rung,
            epsilon,
            r,
            rungs,
        }),
        None if n == 0 => Ok(BottleneckResult {
            pairs: Vec::new(),
            bottleneck: 0.0,
            delta: 0.0,
            rung: 0,
            epsilon,
            r,
            rungs,
        }),
        None => Err(InvariantError::Other("no ladder rung produced a perfect matching".into()).into()),
    }
}
