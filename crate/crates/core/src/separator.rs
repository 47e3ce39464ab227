//! 0/1 weights from recursive balanced vertex separators.
//!
//! A vertex set that is too large is split by a separator; every edge touching
//! a separator vertex gets weight 1 and the two sides are split further. Edges
//! that never touch a separator keep weight 0, so the weight-0 components end
//! up inside the final small sets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::hopcroft_karp;
use crate::graph::{BipartiteGraph, GraphError};

/// One split of a vertex set into `x`, `y` and the separator between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorStep {
    pub vertices: Vec<usize>,
    pub separator: Vec<usize>,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeparatorError {
    #[error("graph has no lattice coordinates")]
    MissingCoordinates,
    #[error("separator step does not partition its {expected} vertices")]
    NotAPartition { expected: usize },
    #[error("separator is empty for a set of {size} vertices")]
    EmptySeparator { size: usize },
    #[error("unbalanced split: side of {side} vertices out of {size} (alpha {alpha})")]
    Unbalanced { side: usize, size: usize, alpha: f64 },
    #[error("edge between vertices {u} and {v} joins the two sides")]
    CrossEdge { u: usize, v: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatorConfig {
    /// Target piece size.
    pub r: usize,
    /// Balance: each side holds at most `(1 - 1/alpha)` of the set.
    pub alpha: f64,
    /// Piece vertex bound is `c_v * r`.
    pub c_v: f64,
    /// Piece edge bound is `c_e * m * r / (n_a + n_b)`.
    pub c_e: f64,
}

impl SeparatorConfig {
    pub fn new(r: usize) -> Self {
        SeparatorConfig {
            r,
            alpha: 3.0,
            c_v: 2.0,
            c_e: 4.0,
        }
    }

    /// Edge count above which a set is split.
    pub fn edge_threshold(&self, graph: &BipartiteGraph) -> f64 {
        let n = graph.vertex_count().max(1) as f64;
        graph.edge_count() as f64 * self.r as f64 / n
    }

    pub fn piece_vertex_bound(&self) -> f64 {
        self.c_v * self.r as f64
    }

    pub fn piece_edge_bound(&self, graph: &BipartiteGraph) -> f64 {
        self.c_e * self.edge_threshold(graph)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightAssignment {
    pub weights: Vec<u8>,
    /// Weight of a maximum-cardinality matching under `weights`.
    pub w_bound: u64,
    /// Every weight-1 edge touches one of these, so no matching weighs more.
    pub separator_vertices: usize,
    pub steps: usize,
}

impl WeightAssignment {
    pub fn apply(&self, graph: &BipartiteGraph) -> Result<BipartiteGraph, GraphError> {
        graph.reweighted(&self.weights)
    }
}

/// Splits `graph` until every set has at most `r` vertices and at most
/// `m r / (n_a + n_b)` induced edges, validating each step `separator_fn`
/// returns.
pub fn assign_weights_recursive<F>(
    graph: &BipartiteGraph,
    config: &SeparatorConfig,
    mut separator_fn: F,
) -> Result<WeightAssignment, SeparatorError>
where
    F: FnMut(&BipartiteGraph, &[usize]) -> Result<SeparatorStep, SeparatorError>,
{
    let n = graph.vertex_count();
    let edge_threshold = config.edge_threshold(graph);
    let mut weights = vec![0u8; graph.edge_count()];
    let mut label = vec![u32::MAX; n];
    let mut stamp = 0u32;
    let mut separator_vertices = 0;
    let mut steps = 0;
    let mut work: Vec<Vec<usize>> = vec![(0..n).collect()];
    while let Some(set) = work.pop() {
        stamp += 1;
        for &v in &set {
            label[v] = stamp;
        }
        let induced = set
            .iter()
            .map(|&v| {
                graph
                    .incident(v)
                    .iter()
                    .filter(|&&e| label[graph.opposite(e, v)] == stamp)
                    .count()
            })
            .sum::<usize>()
            / 2;
        if set.len() <= config.r && induced as f64 <= edge_threshold {
            continue;
        }
        let step = separator_fn(graph, &set)?;
        validate_step(graph, &set, &step, config.alpha)?;
        steps += 1;
        separator_vertices += step.separator.len();
        for &s in &step.separator {
            for &e in graph.incident(s) {
                weights[e] = 1;
            }
        }
        work.push(step.y);
        work.push(step.x);
    }
    let weighted = graph.reweighted(&weights)?;
    let w_bound = hopcroft_karp(&weighted, |_| true).weight(&weighted);
    Ok(WeightAssignment {
        weights,
        w_bound,
        separator_vertices,
        steps,
    })
}

/// Checks partition, non-empty separator, balance and separation.
pub fn validate_step(graph: &BipartiteGraph, set: &[usize], step: &SeparatorStep, alpha: f64) -> Result<(), SeparatorError> {
    let size = set.len();
    let mut side = vec![0u8; graph.vertex_count()];
    for &v in set {
        side[v] = 1;
    }
    for (part, tag) in [(&step.separator, 2u8), (&step.x, 3), (&step.y, 4)] {
        for &v in part.iter() {
            if v >= side.len() || side[v] != 1 {
                return Err(SeparatorError::NotAPartition { expected: size });
            }
            side[v] = tag;
        }
    }
    if step.separator.len() + step.x.len() + step.y.len() != size {
        return Err(SeparatorError::NotAPartition { expected: size });
    }
    if size > 0 && step.separator.is_empty() {
        return Err(SeparatorError::EmptySeparator { size });
    }
    let limit = (1.0 - 1.0 / alpha) * size as f64;
    let larger = step.x.len().max(step.y.len());
    if larger as f64 > limit {
        return Err(SeparatorError::Unbalanced {
            side: larger,
            size,
            alpha,
        });
    }
    for &u in &step.x {
        for &e in graph.incident(u) {
            let v = graph.opposite(e, u);
            if side[v] == 4 {
                return Err(SeparatorError::CrossEdge { u, v });
            }
        }
    }
    Ok(())
}

/// Median row or column of the lattice coordinates, along the larger extent.
pub fn grid_graph_separator(graph: &BipartiteGraph, set: &[usize]) -> Result<SeparatorStep, SeparatorError> {
    let coords = graph.coordinates().ok_or(SeparatorError::MissingCoordinates)?;
    if set.is_empty() {
        return Ok(SeparatorStep {
            vertices: Vec::new(),
            separator: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
        });
    }
    let extent = |f: fn(&(i64, i64)) -> i64| {
        let (lo, hi) = set
            .iter()
            .map(|&v| f(&coords[v]))
            .fold((i64::MAX, i64::MIN), |(lo, hi), c| (lo.min(c), hi.max(c)));
        hi - lo
    };
    let key: fn(&(i64, i64)) -> i64 = if extent(|c| c.0) >= extent(|c| c.1) { |c| c.0 } else { |c| c.1 };
    let mut values: Vec<i64> = set.iter().map(|&v| key(&coords[v])).collect();
    values.sort_unstable();
    let median = values[values.len() / 2];
    let mut step = SeparatorStep {
        vertices: set.to_vec(),
        separator: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
    };
    for &v in set {
        let c = key(&coords[v]);
        match c.cmp(&median) {
            std::cmp::Ordering::Less => step.x.push(v),
            std::cmp::Ordering::Equal => step.separator.push(v),
            std::cmp::Ordering::Greater => step.y.push(v),
        }
    }
    Ok(step)
}

/// Bipartite lattice graph on the given cells, colored like a checkerboard:
/// cells with even `x + y` go to A. Unit-distance neighbors are joined by
/// weight-0 edges; coordinates are attached.
pub fn lattice_from_cells(cells: &[(i64, i64)]) -> BipartiteGraph {
    let mut cells = cells.to_vec();
    cells.sort_unstable();
    cells.dedup();
    let (a_cells, b_cells): (Vec<_>, Vec<_>) = cells.iter().partition(|c| (c.0 + c.1).rem_euclid(2) == 0);
    let b_index: std::collections::HashMap<(i64, i64), usize> =
        b_cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut edges = Vec::new();
    for (ai, &(x, y)) in a_cells.iter().enumerate() {
        for n in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
            if let Some(&bi) = b_index.get(&n) {
                edges.push((ai, bi, 0));
            }
        }
    }
    let coords = a_cells.iter().chain(b_cells.iter()).copied().collect();
    BipartiteGraph::new(a_cells.len(), b_cells.len(), edges)
        .and_then(|g| g.with_coordinates(coords))
        .expect("lattice edges are valid")
}

/// Full `rows x cols` lattice.
pub fn lattice(rows: usize, cols: usize) -> BipartiteGraph {
    let cells: Vec<(i64, i64)> = (0..cols as i64)
        .flat_map(|x| (0..rows as i64).map(move |y| (x, y)))
        .collect();
    lattice_from_cells(&cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::compute_pieces;

    #[test]
    fn small_graph_stays_unweighted() {
        let g = lattice(2, 2);
        let a = assign_weights_recursive(&g, &SeparatorConfig::new(4), grid_graph_separator).unwrap();
        assert!(a.weights.iter().all(|&w| w == 0));
        assert_eq!(a.steps, 0);
    }

    #[test]
    fn four_by_four_median_column() {
        let g = lattice(4, 4);
        let all: Vec<usize> = (0..16).collect();
        let step = grid_graph_separator(&g, &all).unwrap();
        assert!(step.separator.len() <= 5);
        assert_eq!(step.x.len().max(step.y.len()), 8);
        assert_eq!(step.x.len().min(step.y.len()), 4);
        validate_step(&g, &all, &step, 3.0).unwrap();
    }

    #[test]
    fn path_of_sixteen_cuts_three_vertices() {
        let g = lattice(1, 16);
        let a = assign_weights_recursive(&g, &SeparatorConfig::new(4), grid_graph_separator).unwrap();
        assert_eq!(a.separator_vertices, 3);
        let coords = g.coordinates().unwrap();
        let mut cut: Vec<i64> = Vec::new();
        for (e, &w) in a.weights.iter().enumerate() {
            if w == 1 {
                let (u, v) = g.endpoints(e);
                cut.push(coords[u].0.max(coords[v].0));
            }
        }
        // Each cut vertex x contributes the edges (x-1, x) and (x, x+1).
        cut.sort_unstable();
        assert_eq!(cut, vec![4, 5, 8, 9, 12, 13]);
    }

    #[test]
    fn path_separator_is_single_median() {
        let g = lattice(1, 7);
        let all: Vec<usize> = (0..7).collect();
        let step = grid_graph_separator(&g, &all).unwrap();
        assert_eq!(step.separator.len(), 1);
        assert_eq!(g.coordinates().unwrap()[step.separator[0]], (3, 0));
    }

    #[test]
    fn missing_coordinates_rejected() {
        let g = BipartiteGraph::new(1, 1, [(0, 0, 0)]).unwrap();
        assert_eq!(grid_graph_separator(&g, &[0, 1]), Err(SeparatorError::MissingCoordinates));
    }

    #[test]
    fn bad_steps_rejected() {
        let g = lattice(1, 4);
        let all: Vec<usize> = (0..4).collect();
        let coords = g.coordinates().unwrap();
        let at = |x: i64| (0..4).find(|&v| coords[v] == (x, 0)).unwrap();
        let cross = SeparatorStep {
            vertices: all.clone(),
            separator: vec![at(3)],
            x: vec![at(0)],
            y: vec![at(1), at(2)],
        };
        assert!(matches!(validate_step(&g, &all, &cross, 3.0), Err(SeparatorError::CrossEdge { .. })));
        let lopsided = SeparatorStep {
            vertices: all.clone(),
            separator: vec![at(0)],
            x: vec![],
            y: vec![at(1), at(2), at(3)],
        };
        assert!(matches!(validate_step(&g, &all, &lopsided, 3.0), Err(SeparatorError::Unbalanced { .. })));
        let short = SeparatorStep {
            vertices: all.clone(),
            separator: vec![at(0)],
            x: vec![],
            y: vec![at(1)],
        };
        assert!(matches!(validate_step(&g, &all, &short, 3.0), Err(SeparatorError::NotAPartition { .. })));
    }

    #[test]
    fn square_lattice_pieces_within_bounds() {
        let k = 12;
        let g = lattice(k, k);
        let config = SeparatorConfig::new(k);
        let a = assign_weights_recursive(&g, &config, grid_graph_separator).unwrap();
        let p = compute_pieces(&a.apply(&g).unwrap());
        assert!(p.max_piece_vertices <= 2 * k);
        assert!(p.max_piece_edges as f64 <= config.piece_edge_bound(&g));
        assert!(a.w_bound <= a.separator_vertices as u64);
    }
}
