//! The fine grid, its cell neighborhoods and the shifted coarse grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Point, PointSet};

/// Cell coordinates in multiples of the cell side from the grid origin.
pub type CellCoord = (i64, i64);

/// Slack on neighborhood and boundary comparisons so that pairs at distance
/// exactly δ survive rounding in the cell assignment.
const REACH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub coord: CellCoord,
    /// Indices into `PointSet::a`.
    pub a: Vec<usize>,
    /// Indices into `PointSet::b`.
    pub b: Vec<usize>,
    /// Dense indices of every non-empty cell at distance ≤ δ, itself included.
    pub neighbors: Vec<usize>,
    /// Box of the shifted grid holding this cell.
    pub box_id: (i64, i64),
    /// Whether the cell lies within δ of its box boundary.
    pub boundary: bool,
}

/// Per-axis shift of the coarse grid and the boundary-point count of every
/// candidate shift `1..=sqrt_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftChoice {
    pub sqrt_r: i64,
    pub kappa_x: i64,
    pub kappa_y: i64,
    pub counts_x: Vec<usize>,
    pub counts_y: Vec<usize>,
}

impl ShiftChoice {
    /// Points lying near a vertical or horizontal line of the chosen shift.
    pub fn chosen_counts(&self) -> (usize, usize) {
        (
            self.counts_x[(self.kappa_x - 1) as usize],
            self.counts_y[(self.kappa_y - 1) as usize],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridIndex {
    pub delta: f64,
    pub epsilon: f64,
    /// Cell side `εδ / (6√2)`.
    pub side: f64,
    pub origin: Point,
    /// Cells per axis.
    pub columns: i64,
    /// δ measured in cell sides, `6√2 / ε`.
    pub reach: f64,
    pub cells: Vec<Cell>,
    pub a_cell: Vec<usize>,
    pub b_cell: Vec<usize>,
    pub shift: ShiftChoice,
    lookup: HashMap<CellCoord, usize>,
}

/// `⌈n^{2/3}⌉` rounded to the nearest perfect square, with side at least 2.
pub fn default_r(n: usize) -> usize {
    let target = (n as f64).powf(2.0 / 3.0).ceil();
    let q = (target.sqrt().round() as usize).max(2);
    q * q
}

fn within_reach(gap2: i64, reach: f64) -> bool {
    gap2 as f64 <= reach * reach * (1.0 + REACH_TOLERANCE)
}

/// Whether the closest points of two cells are at most `reach` cell sides apart.
pub fn cells_within_reach(c: CellCoord, d: CellCoord, reach: f64) -> bool {
    let gx = ((c.0 - d.0).abs() - 1).max(0);
    let gy = ((c.1 - d.1).abs() - 1).max(0);
    within_reach(gx * gx + gy * gy, reach)
}

/// Offsets `(di, dj)` of every cell within `reach` of the origin cell.
pub fn stencil(reach: f64) -> Vec<CellCoord> {
    let k = reach.floor() as i64 + 1;
    let mut out = Vec::new();
    for di in -k..=k {
        for dj in -k..=k {
            if cells_within_reach((0, 0), (di, dj), reach) {
                out.push((di, dj));
            }
        }
    }
    out
}

impl GridIndex {
    pub fn lookup(&self, coord: CellCoord) -> Option<usize> {
        self.lookup.get(&coord).copied()
    }

    pub fn cell(&self, idx: usize) -> &Cell {
        &self.cells[idx]
    }

    /// Implicit 0/1 weight between two cells.
    pub fn weight(&self, c: usize, d: usize) -> u8 {
        implicit_weight(&self.cells[c], &self.cells[d])
    }

    /// Every point pair `(a, b, weight)` drawn from neighboring cells.
    pub fn point_edges(&self) -> Vec<(usize, usize, u64)> {
        let mut edges = Vec::new();
        for (ci, cell) in self.cells.iter().enumerate() {
            for &a in &cell.a {
                for &nj in &cell.neighbors {
                    let w = self.weight(ci, nj) as u64;
                    for &b in &self.cells[nj].b {
                        edges.push((a, b, w));
                    }
                }
            }
        }
        edges
    }

    /// Points of A ∪ B inside boundary cells.
    pub fn boundary_points(&self) -> usize {
        self.cells.iter().filter(|c| c.boundary).map(|c| c.a.len() + c.b.len()).sum()
    }
}

/// 1 iff the cells lie in different boxes of the shifted grid.
pub fn implicit_weight(c: &Cell, d: &Cell) -> u8 {
    (c.box_id != d.box_id) as u8
}

/// Buckets the points, enumerates neighborhoods and picks the coarse-grid
/// shift. `r` must be a perfect square of at least 1.
pub fn build_grid(points: &PointSet, delta: f64, epsilon: f64, r: usize) -> GridIndex {
    assert!(delta > 0.0, "grid needs a positive δ");
    let q = (r as f64).sqrt().round() as i64;
    assert!(q >= 1 && (q * q) as usize == r, "r = {r} is not a perfect square");
    let side = epsilon * delta / (6.0 * std::f64::consts::SQRT_2);
    let reach = 6.0 * std::f64::consts::SQRT_2 / epsilon;
    let (origin, extent) = points.bounding_square();
    let columns = (extent / side).floor() as i64 + 1;
    let coord_of = |p: &Point| {
        let cx = (((p.x - origin.x) / side).floor() as i64).clamp(0, columns - 1);
        let cy = (((p.y - origin.y) / side).floor() as i64).clamp(0, columns - 1);
        (cx, cy)
    };

    let mut lookup: HashMap<CellCoord, usize> = HashMap::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut slot = |coord: CellCoord, cells: &mut Vec<Cell>| {
        *lookup.entry(coord).or_insert_with(|| {
            cells.push(Cell {
                coord,
                a: Vec::new(),
                b: Vec::new(),
                neighbors: Vec::new(),
                box_id: (0, 0),
                boundary: false,
            });
            cells.len() - 1
        })
    };
    let mut a_cell = Vec::with_capacity(points.a.len());
    for (i, p) in points.a.iter().enumerate() {
        let c = slot(coord_of(p), &mut cells);
        cells[c].a.push(i);
        a_cell.push(c);
    }
    let mut b_cell = Vec::with_capacity(points.b.len());
    for (j, p) in points.b.iter().enumerate() {
        let c = slot(coord_of(p), &mut cells);
        cells[c].b.push(j);
        b_cell.push(c);
    }

    let offsets = stencil(reach);
    if cells.len() <= offsets.len() {
        for i in 0..cells.len() {
            let ci = cells[i].coord;
            cells[i].neighbors = (0..cells.len())
                .filter(|&j| cells_within_reach(ci, cells[j].coord, reach))
                .collect();
        }
    } else {
        for i in 0..cells.len() {
            let (x, y) = cells[i].coord;
            let mut nb: Vec<usize> = offsets
                .iter()
                .filter_map(|&(dx, dy)| lookup.get(&(x + dx, y + dy)).copied())
                .collect();
            nb.sort_unstable();
            cells[i].neighbors = nb;
        }
    }

    let shift = choose_shift(&cells, columns, q, reach);
    for cell in &mut cells {
        let (cx, cy) = cell.coord;
        cell.box_id = ((cx - shift.kappa_x).div_euclid(q), (cy - shift.kappa_y).div_euclid(q));
        cell.boundary = near_line(cx, shift.kappa_x, q, columns, reach) || near_line(cy, shift.kappa_y, q, columns, reach);
    }

    GridIndex {
        delta,
        epsilon,
        side,
        origin,
        columns,
        reach,
        cells,
        a_cell,
        b_cell,
        shift,
        lookup,
    }
}

/// Whether column `c` lies within `reach` cells of a line `i + j q` with
/// `0 < i + j q < columns`. A line at `L` runs between columns `L - 1` and `L`.
fn near_line(c: i64, i: i64, q: i64, columns: i64, reach: f64) -> bool {
    let below = (c >= i).then(|| i + (c - i).div_euclid(q) * q);
    let above = match below {
        Some(l) => l + q,
        None => i,
    };
    let mut best = i64::MAX;
    if let Some(l) = below {
        best = best.min(c - l);
    }
    if above < columns {
        best = best.min(above - c - 1);
    }
    best != i64::MAX && within_reach(best * best, reach)
}

/// For each axis, counts the points in columns near the lines of every shift
/// `i` in `1..=q` and keeps the smallest count (lowest `i` on ties).
pub fn choose_shift(cells: &[Cell], columns: i64, q: i64, reach: f64) -> ShiftChoice {
    let axis = |coord: fn(&Cell) -> i64| {
        let mut per_column: HashMap<i64, usize> = HashMap::new();
        for cell in cells {
            *per_column.entry(coord(cell)).or_default() += cell.a.len() + cell.b.len();
        }
        let counts: Vec<usize> = (1..=q)
            .map(|i| {
                per_column
                    .iter()
                    .filter(|&(&c, _)| near_line(c, i, q, columns, reach))
                    .map(|(_, &k)| k)
                    .sum()
            })
            .collect();
        let best = (0..counts.len()).min_by_key(|&k| (counts[k], k)).unwrap_or(0);
        (best as i64 + 1, counts)
    };
    let (kappa_x, counts_x) = axis(|c| c.coord.0);
    let (kappa_y, counts_y) = axis(|c| c.coord.1);
    ShiftChoice {
        sqrt_r: q,
        kappa_x,
        kappa_y,
        counts_x,
        counts_y,
    }
}
