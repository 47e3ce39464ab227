//! Seeded instance generators.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use zom::{BipartiteGraph, Point, PointSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n_a: usize,
    pub n_b: usize,
    pub m: usize,
    /// Probability that an edge has weight 1.
    pub p_one: f64,
}

impl GraphSpec {
    pub fn describe(&self) -> String {
        format!("random n_a={} n_b={} m={} p_one={}", self.n_a, self.n_b, self.m, self.p_one)
    }

    /// The oracle-suite distribution: both sides up to 60, up to 400
    /// edges, weight-1 probability one of 0.1, 0.5, 0.9.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        GraphSpec {
            n_a: rng.gen_range(1..=60),
            n_b: rng.gen_range(1..=60),
            m: rng.gen_range(0..=400),
            p_one: [0.1, 0.5, 0.9][rng.gen_range(0..3)],
        }
    }
}

/// `m` distinct edges drawn uniformly (capped at `n_a * n_b`), each of
/// weight 1 with probability `p_one`.
pub fn random_graph<R: Rng>(rng: &mut R, spec: &GraphSpec) -> BipartiteGraph {
    let total = spec.n_a * spec.n_b;
    let m = spec.m.min(total);
    let picks = index::sample(rng, total, m).into_vec();
    let edges: Vec<(usize, usize, u64)> = picks
        .into_iter()
        .map(|k| (k / spec.n_b, k % spec.n_b, rng.gen_bool(spec.p_one) as u64))
        .collect();
    BipartiteGraph::new(spec.n_a, spec.n_b, edges).expect("generated edges are distinct and in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Distribution {
    /// Uniform in the unit square.
    Uniform,
    /// Two to five tight clusters at random centers, shared by both sides.
    Clustered,
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, dist: Distribution) -> PointSet {
    match dist {
        Distribution::Uniform => {
            let mut side = || (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
            PointSet::new(side(), side())
        }
        Distribution::Clustered => {
            let k = rng.gen_range(2..=5);
            let centers: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen(), rng.gen())).collect();
            let mut side = || {
                (0..n)
                    .map(|_| {
                        let (cx, cy) = centers[rng.gen_range(0..k)];
                        Point::new(cx + rng.gen_range(-0.04..0.04), cy + rng.gen_range(-0.04..0.04))
                    })
                    .collect()
            };
            PointSet::new(side(), side())
        }
    }
}
