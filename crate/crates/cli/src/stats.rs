//! One JSON record per run.

use serde::{Deserialize, Serialize};
use zom::geo::{BottleneckResult, RungReport};
use zom::matcher::{BoundLedger, MatchResult};
use zom::{BipartiteGraph, PhaseStats, PointSet};

pub const SCHEMA: &str = "zom.stats/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub phase_limit: u64,
    pub phases_within_limit: bool,
    pub path_weights_within_limit: bool,
    pub affected_within_limit: bool,
    pub warnings: usize,
    pub violations: Vec<String>,
}

impl From<&BoundLedger> for LedgerSummary {
    fn from(l: &BoundLedger) -> Self {
        LedgerSummary {
            phase_limit: l.phase_limit,
            phases_within_limit: l.phases_within_limit(),
            path_weights_within_limit: l.path_weights_within_limit(),
            affected_within_limit: l.affected_within_limit(),
            warnings: l.warnings.len(),
            violations: l.violations.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoRecord {
    pub epsilon: f64,
    pub r: usize,
    pub bottleneck: f64,
    pub delta: f64,
    pub rung: usize,
    pub oracle_bottleneck: Option<f64>,
    /// Realized over optimal bottleneck; 1 when both are 0.
    pub ratio: Option<f64>,
    pub rungs: Vec<RungReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub schema: String,
    pub instance: String,
    pub algorithm: String,
    pub seed: Option<u64>,
    pub n_a: usize,
    pub n_b: usize,
    pub size: usize,
    pub preprocess_size: usize,
    /// Largest matching weight held during the (winning) run.
    pub w: u64,
    pub phases: usize,
    pub total_affected: u64,
    pub sum_path_weights: u64,
    pub ledger: Option<LedgerSummary>,
    pub wall_ms: Option<f64>,
    pub per_phase: Vec<PhaseStats>,
    pub geo: Option<GeoRecord>,
    pub pairs: Option<Vec<(usize, usize)>>,
}

impl StatsRecord {
    pub fn from_match(instance: &str, algorithm: &str, graph: &BipartiteGraph, res: &MatchResult) -> Self {
        StatsRecord {
            schema: SCHEMA.into(),
            instance: instance.into(),
            algorithm: algorithm.into(),
            seed: None,
            n_a: graph.n_a(),
            n_b: graph.n_b(),
            size: res.size,
            preprocess_size: res.preprocess_size,
            w: res.ledger.w,
            phases: res.total_phases,
            total_affected: res.total_affected as u64,
            sum_path_weights: res.sum_path_weights,
            ledger: Some((&res.ledger).into()),
            wall_ms: None,
            per_phase: res.phases.clone(),
            geo: None,
            pairs: None,
        }
    }

    pub fn from_bottleneck(instance: &str, points: &PointSet, res: &BottleneckResult, oracle: Option<f64>) -> Self {
        let win = res.rungs.get(res.rung);
        let ratio = oracle.map(|opt| if opt == 0.0 { if res.bottleneck == 0.0 { 1.0 } else { f64::INFINITY } } else { res.bottleneck / opt });
        StatsRecord {
            schema: SCHEMA.into(),
            instance: instance.into(),
            algorithm: "bottleneck".into(),
            seed: None,
            n_a: points.a.len(),
            n_b: points.b.len(),
            size: res.pairs.len(),
            preprocess_size: win.map_or(0, |r| r.preprocess_size),
            w: win.map_or(0, |r| r.w),
            phases: win.map_or(0, |r| r.phases),
            total_affected: win.map_or(0, |r| r.total_affected as u64),
            sum_path_weights: win.map_or(0, |r| r.sum_path_weights),
            ledger: None,
            wall_ms: None,
            per_phase: Vec::new(),
            geo: Some(GeoRecord {
                epsilon: res.epsilon,
                r: res.r,
                bottleneck: res.bottleneck,
                delta: res.delta,
                rung: res.rung,
                oracle_bottleneck: oracle,
                ratio,
                rungs: res.rungs.clone(),
            }),
            pairs: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
