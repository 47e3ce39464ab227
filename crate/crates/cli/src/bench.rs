//! Phase count against the square root of the realized matching weight.

use serde::{Deserialize, Serialize};
use zom::geo::{bottleneck_match_with, BottleneckOptions, LadderMode};
use zom::matcher::{ceil_sqrt, NoObserver};
use zom::separator::{assign_weights_recursive, grid_graph_separator, lattice, SeparatorConfig};
use zom::{run_matcher, BipartiteGraph};

use crate::generate::{random_graph, random_points, rng, Distribution, GraphSpec};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Family {
    /// Random graphs with `degree * n` edges and weight-1 probability `p_one`.
    Random,
    /// Random graphs with every weight 1.
    Unit,
    /// Square lattices of about `n` vertices, weighted by separators.
    Lattice,
    /// Uniform point sets of `n` per side, lowest perfect rung.
    Points,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub degree: usize,
    pub p_one: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub seed: u64,
    pub w: u64,
    pub phases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub samples: Vec<Sample>,
    pub median_w: f64,
    pub median_phases: f64,
    /// `median_phases / sqrt(max(median_w, 1))`.
    pub ratio: f64,
    /// Every sample has `phases <= 3 * ceil(sqrt(w))`.
    pub within_limit: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

fn sample_seed(seed: u64, n: usize, rep: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((n as u64) << 32 | rep as u64)
}

fn graph_sample(seed: u64, graph: &BipartiteGraph) -> Sample {
    let res = run_matcher(graph);
    Sample {
        seed,
        w: res.ledger.w,
        phases: res.total_phases,
    }
}

fn sample(config: &BenchConfig, n: usize, rep: usize) -> Result<Sample, CliError> {
    let seed = sample_seed(config.seed, n, rep);
    let mut rng = rng(seed);
    match config.family {
        Family::Random | Family::Unit => {
            let spec = GraphSpec {
                n_a: n,
                n_b: n,
                m: config.degree * n,
                p_one: if config.family == Family::Unit { 1.0 } else { config.p_one },
            };
            Ok(graph_sample(seed, &random_graph(&mut rng, &spec)))
        }
        Family::Lattice => {
            let k = ((n as f64).sqrt().round() as usize).max(1);
            let g = lattice(k, k);
            let r = ((g.vertex_count() as f64).powf(2.0 / 3.0).round() as usize).max(1);
            let weights = assign_weights_recursive(&g, &SeparatorConfig::new(r), grid_graph_separator)
                .map_err(|e| CliError::Invariant(e.to_string()))?;
            Ok(graph_sample(seed, &weights.apply(&g).map_err(|e| CliError::Invariant(e.to_string()))?))
        }
        Family::Points => {
            let points = random_points(&mut rng, n, Distribution::Uniform);
            let options = BottleneckOptions {
                r: None,
                mode: LadderMode::FirstPerfect,
            };
            let res = bottleneck_match_with(&points, config.epsilon, options, &mut NoObserver)
                .map_err(|e| CliError::Invariant(e.to_string()))?;
            let rung = &res.rungs[res.rung];
            Ok(Sample {
                seed,
                w: rung.w,
                phases: rung.phases,
            })
        }
    }
}

pub fn run(config: &BenchConfig) -> Result<Vec<BenchRow>, CliError> {
    if config.reps == 0 {
        return Err(CliError::Usage("bench needs at least one repetition".into()));
    }
    config
        .sizes
        .iter()
        .map(|&n| {
            let samples = (0..config.reps).map(|rep| sample(config, n, rep)).collect::<Result<Vec<_>, _>>()?;
            let median_w = median(samples.iter().map(|s| s.w as f64).collect());
            let median_phases = median(samples.iter().map(|s| s.phases as f64).collect());
            Ok(BenchRow {
                n,
                median_w,
                median_phases,
                ratio: median_phases / median_w.max(1.0).sqrt(),
                within_limit: samples.iter().all(|s| s.phases as u64 <= 3 * ceil_sqrt(s.w)),
                samples,
            })
        })
        .collect()
}

/// Whether every row's ratio stays within `factor` of the first row's.
pub fn trend_ok(rows: &[BenchRow], factor: f64) -> bool {
    match rows.first() {
        None => true,
        Some(first) => rows.iter().all(|r| r.ratio <= factor * first.ratio.max(f64::MIN_POSITIVE)),
    }
}

pub fn table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:>8} {:>5} {:>10} {:>10} {:>10} {:>9} {:>6}\n",
        "n", "reps", "median_w", "median_λ", "3ceil√w", "λ/√w", "bound"
    );
    for r in rows {
        let limit = 3 * ceil_sqrt(r.median_w.ceil() as u64);
        out.push_str(&format!(
            "{:>8} {:>5} {:>10.1} {:>10.1} {:>10} {:>9.3} {:>6}\n",
            r.n,
            r.samples.len(),
            r.median_w,
            r.median_phases,
            limit,
            r.ratio,
            if r.within_limit { "ok" } else { "FAIL" }
        ));
    }
    out
}
