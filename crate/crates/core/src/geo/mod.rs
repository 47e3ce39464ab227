//! ε-approximate bottleneck matching of planar point sets.
//!
//! For each guess δ of the bottleneck distance, points are bucketed into a
//! grid of cell side εδ/(6√2) and joined to every point of a neighboring cell
//! (cells at distance ≤ δ). A coarser shifted grid splits the plane into
//! boxes; edges between boxes get weight 1, all others weight 0. The phase
//! matcher then runs on a compact residual network whose vertices are
//! (cell, side, dual) clusters.

pub mod compact;
pub mod grid;
pub mod matcher;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::InvariantError;

pub use compact::{ClusterId, CompactResidual};
pub use grid::{build_grid, choose_shift, default_r, implicit_weight, GridIndex, ShiftChoice};
pub use matcher::{
    bottleneck_match, bottleneck_match_with, geo_match, geo_match_with, geo_preprocess, BottleneckOptions,
    BottleneckResult, GeoObserver, GeoRun, GeoStage, GeoView, LadderMode, RungReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// Two labelled point sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub a: Vec<Point>,
    pub b: Vec<Point>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point sets differ in size: |A| = {a}, |B| = {b}")]
    Unbalanced { a: usize, b: usize },
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("point {index} of side {side} has a non-finite coordinate")]
    NonFinite { side: char, index: usize },
    #[error("grid parameter r must be a positive perfect square, got {0}")]
    InvalidR(usize),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

impl PointSet {
    pub fn new(a: Vec<Point>, b: Vec<Point>) -> Self {
        PointSet { a, b }
    }

    pub fn check_balanced(&self) -> Result<(), GeoError> {
        if self.a.len() != self.b.len() {
            return Err(GeoError::Unbalanced {
                a: self.a.len(),
                b: self.b.len(),
            });
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<(), GeoError> {
        for (side, pts) in [('A', &self.a), ('B', &self.b)] {
            if let Some(index) = pts.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(GeoError::NonFinite { side, index });
            }
        }
        Ok(())
    }

    pub fn all(&self) -> impl Iterator<Item = &Point> {
        self.a.iter().chain(self.b.iter())
    }

    /// Lower-left corner and side length of the smallest axis-aligned square
    /// holding every point.
    pub fn bounding_square(&self) -> (Point, f64) {
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.all() {
            lo_x = lo_x.min(p.x);
            lo_y = lo_y.min(p.y);
            hi_x = hi_x.max(p.x);
            hi_y = hi_y.max(p.y);
        }
        if lo_x > hi_x {
            return (Point::new(0.0, 0.0), 0.0);
        }
        (Point::new(lo_x, lo_y), (hi_x - lo_x).max(hi_y - lo_y))
    }

    /// Largest Euclidean distance between any two points of A ∪ B.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<&Point> = self.all().collect();
        let mut best = 0.0f64;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                best = best.max(p.dist2(q));
            }
        }
        best.sqrt()
    }

    /// `max(max_a min_b |a-b|, max_b min_a |a-b|)`, a lower bound on the
    /// bottleneck distance of any perfect matching.
    pub fn nearest_neighbor_bound(&self) -> f64 {
        let one_way = |from: &[Point], to: &[Point]| {
            from.iter()
                .map(|p| to.iter().map(|q| p.dist2(q)).fold(f64::INFINITY, f64::min))
                .fold(0.0f64, f64::max)
        };
        one_way(&self.a, &self.b).max(one_way(&self.b, &self.a)).sqrt()
    }

    /// Smallest positive A-B distance, if any.
    pub fn min_positive_distance(&self) -> Option<f64> {
        let mut best = f64::INFINITY;
        for p in &self.a {
            for q in &self.b {
                let d = p.dist2(q);
                if d > 0.0 && d < best {
                    best = d;
                }
            }
        }
        best.is_finite().then(|| best.sqrt())
    }

    /// A perfect matching of equal points, if the sets are equal as multisets.
    pub fn coincident_matching(&self) -> Option<Vec<(usize, usize)>> {
        if self.a.len() != self.b.len() {
            return None;
        }
        let order = |pts: &[Point]| {
            let mut idx: Vec<usize> = (0..pts.len()).collect();
            idx.sort_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x).then(pts[i].y.total_cmp(&pts[j].y)));
            idx
        };
        let (oa, ob) = (order(&self.a), order(&self.b));
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(oa.len());
        for (&i, &j) in oa.iter().zip(&ob) {
            if self.a[i] != self.b[j] {
                return None;
            }
            pairs.push((i, j));
        }
        pairs.sort_unstable();
        Some(pairs)
    }
}

/// Largest edge length of a matching given as `(a, b)` index pairs.
pub fn matching_bottleneck(points: &PointSet, pairs: &[(usize, usize)]) -> f64 {
    pairs
        .iter()
        .map(|&(i, j)| points.a[i].dist2(&points.b[j]))
        .fold(0.0f64, f64::max)
        .sqrt()
}

/// Guesses `L (1 + ε/3)^i` for `i = 0, 1, ...` up to and including the first
/// value at least the diameter `U`, where `L` is the nearest-neighbor lower
/// bound. When `L = 0` the ladder starts with the guess 0 and continues from
/// the smallest positive A-B distance.
pub fn delta_candidates(points: &PointSet, epsilon: f64) -> Vec<f64> {
    if points.a.is_empty() || points.b.is_empty() {
        return Vec::new();
    }
    let ratio = 1.0 + epsilon / 3.0;
    let upper = points.diameter();
    let mut lower = points.nearest_neighbor_bound();
    let mut ladder = Vec::new();
    if lower == 0.0 {
        ladder.push(0.0);
        match points.min_positive_distance() {
            Some(d) => lower = d,
            None => return ladder,
        }
    }
    let mut i = 0;
    loop {
        let delta = lower * ratio.powi(i);
        ladder.push(delta);
        if delta >= upper {
            return ladder;
        }
        i += 1;
    }
}
