//! Residual network on (cell, side, dual) clusters.
//!
//! Every point of one cell and side with the same dual belongs to one
//! cluster. A B-cluster `Y` has an arc to an A-cluster `X` in a neighboring
//! cell when some non-matching pair `Y x X` exists; its slack is
//! `w + y(X) - y(Y)`. An A-cluster has a 0-slack arc to every B-cluster its
//! points are matched into.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::grid::GridIndex;
use crate::dfs::DfsNetwork;
use crate::dial::{self, SlackNetwork};
use crate::graph::{BipartiteGraph, InvariantError, MatchState, Side};

pub type ClusterId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClusterKey {
    pub side: Side,
    pub cell: usize,
    pub dual: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub key: ClusterKey,
    /// Point indices on the cluster's side.
    pub members: BTreeSet<usize>,
    pub free: usize,
    /// A-clusters only: matched members grouped by their mate's cluster.
    matched_into: BTreeMap<ClusterId, BTreeSet<usize>>,
}

impl Cluster {
    pub fn matched_into(&self) -> &BTreeMap<ClusterId, BTreeSet<usize>> {
        &self.matched_into
    }
}

/// A materialized compact arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactArc {
    pub from: ClusterId,
    pub to: ClusterId,
    pub weight: u8,
    pub slack: i64,
    pub matching: bool,
}

/// Cluster graph over the point-level state. Cluster ids stay stable for
/// the lifetime of the value; emptied clusters are kept but carry no arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactResidual {
    clusters: Vec<Cluster>,
    index: HashMap<ClusterKey, ClusterId>,
    cell_a: Vec<Vec<ClusterId>>,
    cell_b: Vec<Vec<ClusterId>>,
    of_a: Vec<ClusterId>,
    of_b: Vec<ClusterId>,
}

impl CompactResidual {
    /// Clusters every point of the point-level graph `graph` (A-point `i` is
    /// vertex `i`, B-point `j` is vertex `n_a + j`).
    pub fn build(grid: &GridIndex, graph: &BipartiteGraph, state: &MatchState) -> Self {
        let mut out = CompactResidual {
            clusters: Vec::new(),
            index: HashMap::new(),
            cell_a: vec![Vec::new(); grid.cells.len()],
            cell_b: vec![Vec::new(); grid.cells.len()],
            of_a: vec![usize::MAX; graph.n_a()],
            of_b: vec![usize::MAX; graph.n_b()],
        };
        for j in 0..graph.n_b() {
            out.insert(grid, graph, state, Side::B, j);
        }
        for i in 0..graph.n_a() {
            out.insert(grid, graph, state, Side::A, i);
        }
        out
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster(&self, id: ClusterId) -> &Cluster {
        &self.clusters[id]
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_of_a(&self, i: usize) -> ClusterId {
        self.of_a[i]
    }

    pub fn cluster_of_b(&self, j: usize) -> ClusterId {
        self.of_b[j]
    }

    /// Non-empty clusters of one side in one cell.
    pub fn cell_clusters(&self, cell: usize, side: Side) -> impl Iterator<Item = ClusterId> + '_ {
        let list = match side {
            Side::A => &self.cell_a[cell],
            Side::B => &self.cell_b[cell],
        };
        list.iter().copied().filter(|&c| !self.clusters[c].members.is_empty())
    }

    fn id_for(&mut self, key: ClusterKey) -> ClusterId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.clusters.len();
        self.clusters.push(Cluster {
            key,
            members: BTreeSet::new(),
            free: 0,
            matched_into: BTreeMap::new(),
        });
        self.index.insert(key, id);
        match key.side {
            Side::A => self.cell_a[key.cell].push(id),
            Side::B => self.cell_b[key.cell].push(id),
        }
        id
    }

    /// Adds a point under its current dual and mate. B-points must be
    /// inserted before the A-points matched to them.
    pub fn insert(&mut self, grid: &GridIndex, graph: &BipartiteGraph, state: &MatchState, side: Side, idx: usize) {
        let (vertex, cell) = match side {
            Side::A => (idx, grid.a_cell[idx]),
            Side::B => (graph.b_vertex(idx), grid.b_cell[idx]),
        };
        let id = self.id_for(ClusterKey {
            side,
            cell,
            dual: state.dual(vertex),
        });
        let free = state.is_free(vertex);
        let cluster = &mut self.clusters[id];
        cluster.members.insert(idx);
        cluster.free += free as usize;
        match side {
            Side::A => {
                self.of_a[idx] = id;
                if let Some(b) = state.partner(graph, vertex) {
                    let target = self.of_b[b - graph.n_a()];
                    self.clusters[id].matched_into.entry(target).or_default().insert(idx);
                }
            }
            Side::B => self.of_b[idx] = id,
        }
    }

    /// Removes a point. `state` must still hold the mate it was inserted with.
    /// A B-point must be removed after the A-point matched to it.
    pub fn remove(&mut self, graph: &BipartiteGraph, state: &MatchState, side: Side, idx: usize) {
        match side {
            Side::A => {
                let id = self.of_a[idx];
                if let Some(b) = state.partner(graph, idx) {
                    let target = self.of_b[b - graph.n_a()];
                    let cluster = &mut self.clusters[id];
                    if let Some(set) = cluster.matched_into.get_mut(&target) {
                        set.remove(&idx);
                        if set.is_empty() {
                            cluster.matched_into.remove(&target);
                        }
                    }
                }
                let cluster = &mut self.clusters[id];
                cluster.members.remove(&idx);
                cluster.free -= state.is_free(idx) as usize;
                self.of_a[idx] = usize::MAX;
            }
            Side::B => {
                let id = self.of_b[idx];
                let cluster = &mut self.clusters[id];
                cluster.members.remove(&idx);
                cluster.free -= state.is_free(graph.b_vertex(idx)) as usize;
                self.of_b[idx] = usize::MAX;
            }
        }
    }

    /// Calls `f(head, weight, slack)` for every arc leaving cluster `v`.
    pub fn for_each_arc(&self, grid: &GridIndex, v: ClusterId, f: &mut dyn FnMut(ClusterId, u8, i64)) {
        let cluster = &self.clusters[v];
        if cluster.members.is_empty() {
            return;
        }
        match cluster.key.side {
            Side::B => {
                for &nc in &grid.cells[cluster.key.cell].neighbors {
                    let w = grid.weight(cluster.key.cell, nc);
                    for &x in &self.cell_a[nc] {
                        let target = &self.clusters[x];
                        let matched = target.matched_into.get(&v).map_or(0, BTreeSet::len);
                        if cluster.members.len() * target.members.len() > matched {
                            f(x, w, w as i64 + target.key.dual - cluster.key.dual);
                        }
                    }
                }
            }
            Side::A => {
                for &y in cluster.matched_into.keys() {
                    let w = grid.weight(cluster.key.cell, self.clusters[y].key.cell);
                    f(y, w, 0);
                }
            }
        }
    }

    /// Every arc, for inspection.
    pub fn arcs(&self, grid: &GridIndex) -> Vec<CompactArc> {
        let mut out = Vec::new();
        for v in 0..self.clusters.len() {
            let matching = self.clusters[v].key.side == Side::A;
            self.for_each_arc(grid, v, &mut |to, weight, slack| {
                out.push(CompactArc {
                    from: v,
                    to,
                    weight,
                    slack,
                    matching,
                })
            });
        }
        out
    }

    /// Shortest slack distances from the free B-clusters.
    pub fn distances(&self, grid: &GridIndex) -> Vec<u32> {
        dial::dijkstra(&CompactView { grid, compact: self })
    }

    /// Largest number of non-empty clusters in any cell on either side.
    pub fn max_clusters_per_cell(&self) -> usize {
        self.cell_a
            .iter()
            .chain(self.cell_b.iter())
            .map(|list| list.iter().filter(|&&c| !self.clusters[c].members.is_empty()).count())
            .max()
            .unwrap_or(0)
    }
}

/// Largest `max - min` of point duals within one cell and side.
pub fn max_dual_spread(grid: &GridIndex, graph: &BipartiteGraph, state: &MatchState) -> i64 {
    let mut worst = 0;
    for cell in &grid.cells {
        for vertices in [
            cell.a.to_vec(),
            cell.b.iter().map(|&j| graph.b_vertex(j)).collect(),
        ] {
            let duals = vertices.iter().map(|&v| state.dual(v));
            if let (Some(lo), Some(hi)) = (duals.clone().min(), duals.max()) {
                worst = worst.max(hi - lo);
            }
        }
    }
    worst
}

/// Fails when some cell side holds duals more than 2 apart.
pub fn check_spread(grid: &GridIndex, graph: &BipartiteGraph, state: &MatchState) -> Result<(), InvariantError> {
    let spread = max_dual_spread(grid, graph, state);
    if spread > 2 {
        return Err(InvariantError::Other(format!("dual spread {spread} exceeds 2 within a cell")));
    }
    Ok(())
}

/// Dijkstra adaptor.
pub struct CompactView<'a> {
    pub grid: &'a GridIndex,
    pub compact: &'a CompactResidual,
}

impl SlackNetwork for CompactView<'_> {
    fn vertex_count(&self) -> usize {
        self.compact.clusters.len()
    }

    fn for_each_source(&self, f: &mut dyn FnMut(usize)) {
        for (id, c) in self.compact.clusters.iter().enumerate() {
            if c.key.side == Side::B && c.free > 0 {
                f(id);
            }
        }
    }

    fn for_each_arc(&self, v: usize, f: &mut dyn FnMut(usize, i64)) {
        self.compact.for_each_arc(self.grid, v, &mut |head, _, slack| f(head, slack));
    }
}

/// Admissible arcs not deleted in the current phase.
pub struct CompactDfs<'a> {
    pub grid: &'a GridIndex,
    pub compact: &'a CompactResidual,
    pub deleted: &'a std::collections::HashSet<(ClusterId, ClusterId)>,
}

impl DfsNetwork for CompactDfs<'_> {
    type Arc = (ClusterId, ClusterId);

    fn out_arcs(&self, v: usize, out: &mut Vec<((ClusterId, ClusterId), usize)>) {
        self.compact.for_each_arc(self.grid, v, &mut |head, _, slack| {
            if slack == 0 && !self.deleted.contains(&(v, head)) {
                out.push(((v, head), head));
            }
        });
    }

    fn is_target(&self, v: usize) -> bool {
        let c = &self.compact.clusters[v];
        c.key.side == Side::A && c.free > 0
    }
}
