//! Maximum-cardinality bipartite matching driven by 0/1 edge weights.
//!
//! The graph engine ([`matcher`]) runs a primal-dual phase algorithm on a
//! bipartite graph whose edges carry weight 0 or 1. Connected components of
//! the weight-0 subgraph ("pieces") are matched up front; the remaining work
//! proceeds in phases, each made of a Dijkstra dual adjustment followed by a
//! multi-root DFS that only discards edges lying outside the pieces touched
//! by the augmenting paths it finds.
//!
//! Two instantiations ship with the engine:
//!
//! * [`separator`] assigns 0/1 weights by recursive balanced vertex
//!   separators (lattice graphs have a built-in separator).
//! * [`geo`] computes an ε-approximate bottleneck matching of two planar
//!   point sets by running the same phase loop on a grid-clustered compact
//!   residual network.
//!
//! [`baseline`] holds Hopcroft-Karp and the brute-force oracles, and
//! [`audit`] the invariant checks used by tests and the `verify` command.

#![allow(clippy::needless_range_loop)]

pub mod audit;
pub mod baseline;
pub mod dfs;
pub mod dial;
pub mod geo;
pub mod graph;
pub mod matcher;
pub mod separator;

pub use baseline::{brute_force_max_matching, hopcroft_karp, oracle_bottleneck, Matching, OracleResult};
pub use geo::{bottleneck_match, Point, PointSet};
pub use graph::{
    check_feasibility, compute_pieces, BipartiteGraph, Edge, EdgeId, GraphError, MatchState,
    PieceDecomposition, PieceId, ResidualView, Violation,
};
pub use matcher::{run_matcher, MatchResult, PhaseStats};
