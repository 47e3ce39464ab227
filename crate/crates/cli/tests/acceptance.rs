//! End-to-end acceptance run: one line per criterion, nonzero exit on any
//! failure. Checkers here are written against edge lists and point
//! coordinates rather than the library's own audit helpers.

use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::time::{Duration, Instant};

use zom::geo::{bottleneck_match_with, BottleneckOptions, GeoObserver, GeoStage, GeoView, LadderMode};
use zom::graph::{check_feasibility, Side};
use zom::matcher::{run_matcher_with, PhaseObserver};
use zom::separator::{assign_weights_recursive, grid_graph_separator, lattice, SeparatorConfig};
use zom::{
    brute_force_max_matching, compute_pieces, hopcroft_karp, oracle_bottleneck, run_matcher, BipartiteGraph,
    EdgeId, MatchState, PhaseStats, PieceDecomposition, PointSet,
};
use zom_cli::bench::{self, BenchConfig, Family};
use zom_cli::generate::{random_graph, random_points, rng, Distribution, GraphSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn corpus(seed: u64, count: usize) -> Vec<BipartiteGraph> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let spec = GraphSpec::sample(&mut rng);
            random_graph(&mut rng, &spec)
        })
        .collect()
}

/// Residual arcs `(tail, head, slack, weight)` over unified vertex indices.
fn residual_arcs(g: &BipartiteGraph, s: &MatchState) -> Vec<(usize, usize, i64, u8)> {
    g.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let (a, b) = (edge.a, g.n_a() + edge.b);
            if s.mate_edge(a) == Some(e) {
                (a, b, edge.weight as i64 - s.dual(a) + s.dual(b), edge.weight)
            } else {
                (b, a, edge.weight as i64 + s.dual(a) - s.dual(b), edge.weight)
            }
        })
        .collect()
}

fn zero_adjacency(n: usize, arcs: &[(usize, usize, i64, u8)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, slack, _) in arcs {
        if slack == 0 {
            adj[u].push(v);
        }
    }
    adj
}

fn reaches(adj: &[Vec<usize>], from: &[usize], target: impl Fn(usize) -> bool) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = from.iter().copied().collect();
    for &v in from {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        if target(v) {
            return true;
        }
        for &h in &adj[v] {
            if !seen[h] {
                seen[h] = true;
                queue.push_back(h);
            }
        }
    }
    false
}

/// Per-state checks on the graph matcher.
#[derive(Default)]
struct GraphChecks {
    cycles: bool,
    states: usize,
    infeasible: usize,
    free_dual: usize,
    not_exhausted: usize,
    unit_cycles: usize,
}

impl GraphChecks {
    fn state(&mut self, g: &BipartiteGraph, s: &MatchState) {
        self.states += 1;
        let arcs = residual_arcs(g, s);
        let matched_eq = g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(e, _)| s.mate_edge(g.edges()[e].a) == Some(e))
            .all(|(_, edge)| s.dual(edge.a) - s.dual(g.n_a() + edge.b) == edge.weight as i64);
        if !matched_eq || arcs.iter().any(|a| a.2 < 0) || !check_feasibility(g, s).is_empty() {
            self.infeasible += 1;
        }
        let free_b: Vec<usize> = (g.n_a()..g.vertex_count()).filter(|&v| s.mate_edge(v).is_none()).collect();
        let top = (g.n_a()..g.vertex_count()).map(|v| s.dual(v)).max().unwrap_or(0);
        let bad_b = free_b.iter().any(|&v| s.dual(v) != top);
        let bad_a = (0..g.n_a()).any(|v| s.mate_edge(v).is_none() && s.dual(v) != 0);
        if bad_a || bad_b {
            self.free_dual += 1;
        }
        if self.cycles {
            let adj = zero_adjacency(g.vertex_count(), &arcs);
            for &(u, v, slack, w) in &arcs {
                if slack == 0 && w == 1 && reaches(&adj, &[v], |x| x == u) {
                    self.unit_cycles += 1;
                    break;
                }
            }
        }
    }
}

impl PhaseObserver for GraphChecks {
    fn after_preprocess(&mut self, g: &BipartiteGraph, _p: &PieceDecomposition, s: &MatchState) {
        self.state(g, s);
    }

    fn after_stage1(&mut self, g: &BipartiteGraph, s: &MatchState, _d: &[u32], _l: u32) {
        self.state(g, s);
    }

    fn after_augment(&mut self, g: &BipartiteGraph, s: &MatchState, _p: &[EdgeId]) {
        self.state(g, s);
    }

    fn after_stage2(&mut self, g: &BipartiteGraph, s: &MatchState, _st: &PhaseStats) {
        self.state(g, s);
        let arcs = residual_arcs(g, s);
        let adj = zero_adjacency(g.vertex_count(), &arcs);
        let free_b: Vec<usize> = (g.n_a()..g.vertex_count()).filter(|&v| s.mate_edge(v).is_none()).collect();
        if reaches(&adj, &free_b, |v| v < g.n_a() && s.mate_edge(v).is_none()) {
            self.not_exhausted += 1;
        }
    }
}

fn ac1(graphs: &[BipartiteGraph]) -> Outcome {
    let start = Instant::now();
    let equal = graphs
        .iter()
        .filter(|g| run_matcher(g).size == brute_force_max_matching(g).matching_size)
        .count();
    let t = secs(start.elapsed());
    outcome(
        equal == graphs.len() && t < 30.0,
        format!("{equal}/{} cardinality equal to the brute-force oracle, {t:.2} s (limit 30 s)", graphs.len()),
    )
}

fn ac2_ac4(graphs: &[BipartiteGraph]) -> (Outcome, Outcome) {
    let mut total = GraphChecks::default();
    for g in graphs {
        let mut c = GraphChecks::default();
        run_matcher_with(g, &mut c).expect("matcher run");
        total.states += c.states;
        total.infeasible += c.infeasible;
        total.free_dual += c.free_dual;
        total.not_exhausted += c.not_exhausted;
    }
    let v = total.infeasible + total.free_dual;
    (
        outcome(
            v == 0,
            format!(
                "{} states checked, {} infeasible, {} free-dual violations",
                total.states, total.infeasible, total.free_dual
            ),
        ),
        outcome(
            total.not_exhausted == 0,
            format!("{} phases left a zero-slack free-B to free-A path over {} instances", total.not_exhausted, graphs.len()),
        ),
    )
}

fn ac3(graphs: &[BipartiteGraph]) -> Outcome {
    let (mut phases, mut paths, mut sums) = (0, 0, 0);
    let mut worst = (0u64, 0u64);
    for g in graphs {
        let l = run_matcher(g).ledger;
        phases += l.phases_within_limit() as usize;
        paths += l.path_weights_within_limit() as usize;
        sums += l.affected_within_limit() as usize;
        if !l.affected_within_limit() {
            worst = (l.total_affected, l.total_path_weight);
        }
    }
    let n = graphs.len();
    let mut detail = format!(
        "{n} instances: λ <= 3ceil(√w) {phases}/{n}, c(P_l)(t-l+1) <= 2w {paths}/{n}, Σ|K| <= Σc(P) {sums}/{n}"
    );
    if sums < n {
        detail.push_str(&format!(" (last failure: Σ|K| = {} vs Σc(P) = {})", worst.0, worst.1));
    }
    outcome(phases == n && paths == n && sums == n, detail)
}

fn ac5() -> Outcome {
    let mut rng = rng(5);
    let mut total = GraphChecks::default();
    for _ in 0..100 {
        let spec = GraphSpec {
            n_a: rand::Rng::gen_range(&mut rng, 1..=30),
            n_b: rand::Rng::gen_range(&mut rng, 1..=30),
            m: rand::Rng::gen_range(&mut rng, 0..=200),
            p_one: [0.1, 0.5, 0.9][rand::Rng::gen_range(&mut rng, 0..3)],
        };
        let g = random_graph(&mut rng, &spec);
        let mut c = GraphChecks {
            cycles: true,
            ..GraphChecks::default()
        };
        run_matcher_with(&g, &mut c).expect("matcher run");
        total.states += c.states;
        total.unit_cycles += c.unit_cycles;
    }
    outcome(
        total.unit_cycles == 0,
        format!("{} states on 100 instances, {} with a zero-slack cycle through a weight-1 edge", total.states, total.unit_cycles),
    )
}

fn ac6() -> Outcome {
    let mut rng = rng(6);
    let (mut zero_ok, mut one_ok) = (0, 0);
    for i in 0..100 {
        let mut spec = GraphSpec::sample(&mut rng);
        spec.p_one = if i < 50 { 0.0 } else { 1.0 };
        let g = random_graph(&mut rng, &spec);
        let res = run_matcher(&g);
        let hk = hopcroft_karp(&g, |_| true).size();
        if i < 50 {
            let augmentations: usize = res.phases.iter().map(|p| p.augmenting_paths).sum();
            zero_ok += (augmentations == 0 && res.size == hk) as usize;
        } else {
            one_ok += (res.size == hk) as usize;
        }
    }
    outcome(
        zero_ok == 50 && one_ok == 50,
        format!("all-weight-0: {zero_ok}/50 with no post-preprocessing augmentation; all-weight-1: {one_ok}/50 equal to HK"),
    )
}

fn ac7() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let sizes = [4usize, 8, 12, 16, 24, 32, 48, 64];
    for &k in &sizes {
        let g = lattice(k, k);
        let n = g.vertex_count();
        let r = ((n as f64).powf(2.0 / 3.0).round() as usize).max(1);
        let config = SeparatorConfig::new(r);
        let weights = assign_weights_recursive(&g, &config, grid_graph_separator).expect("lattice separator");
        let weighted = weights.apply(&g).expect("reweight");
        let pieces = compute_pieces(&weighted);
        let res = run_matcher(&weighted);
        let w_bound = 8.0 * n as f64 / (r as f64).sqrt();
        if pieces.max_piece_vertices as f64 > config.piece_vertex_bound()
            || pieces.max_piece_edges as f64 > config.piece_edge_bound(&g)
        {
            failures.push(format!("{k}x{k} piece size"));
        }
        if res.ledger.w as f64 > w_bound {
            failures.push(format!("{k}x{k} w {} > {w_bound:.1}", res.ledger.w));
        }
        if res.size != hopcroft_karp(&g, |_| true).size() {
            failures.push(format!("{k}x{k} cardinality"));
        }
    }
    let t = secs(start.elapsed());
    let pass = failures.is_empty() && t < 60.0;
    outcome(
        pass,
        format!("lattices {:?} (side), {} failures {:?}, {t:.2} s (limit 60 s)", sizes, failures.len(), failures),
    )
}

/// Dual spread and distinct duals per cell side, from grid cells directly.
#[derive(Default)]
struct SpreadChecks {
    states: usize,
    max_spread: i64,
    max_values: usize,
    max_clusters: usize,
}

impl GeoObserver for SpreadChecks {
    fn observe(&mut self, stage: GeoStage, view: &GeoView<'_>) {
        if !stage.is_exposed() {
            return;
        }
        self.states += 1;
        for cell in &view.grid.cells {
            let a: BTreeSet<i64> = cell.a.iter().map(|&i| view.state.dual(i)).collect();
            let b: BTreeSet<i64> = cell.b.iter().map(|&j| view.state.dual(view.graph.n_a() + j)).collect();
            for set in [a, b] {
                if let (Some(lo), Some(hi)) = (set.first(), set.last()) {
                    self.max_spread = self.max_spread.max(hi - lo);
                }
                self.max_values = self.max_values.max(set.len());
            }
        }
        self.max_clusters = self.max_clusters.max(view.compact.max_clusters_per_cell());
    }
}

fn ac8(spread: &mut SpreadChecks) -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = rng(8);
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    let sizes = [16usize, 64, 128];
    for i in 0..200 {
        let n = sizes[i % 3];
        let dist = if (i / 3) % 2 == 0 { Distribution::Uniform } else { Distribution::Clustered };
        let points = random_points(&mut rng, n, dist);
        let opt = oracle_bottleneck(&points).expect("balanced").distance;
        let mut all = true;
        for eps in [0.5, 0.25] {
            let res = bottleneck_match_with(&points, eps, BottleneckOptions::default(), spread).expect("geo run");
            let perfect = res.pairs.len() == n && distinct_b(&res.pairs, n);
            let ratio = if opt == 0.0 { 1.0 } else { res.bottleneck / opt };
            worst = worst.max(ratio / (1.0 + eps));
            all &= perfect && res.bottleneck <= (1.0 + eps) * opt;
        }
        ok += all as usize;
    }
    let t = secs(start.elapsed());
    let quality = outcome(
        ok == 200 && t < 300.0,
        format!(
            "{ok}/200 point sets perfect within (1+ε)β* for ε in {{0.5, 0.25}}, worst ratio/(1+ε) {worst:.4}, {t:.1} s (limit 300 s)"
        ),
    );
    let rows = bench::run(&BenchConfig {
        family: Family::Points,
        sizes: vec![64, 128, 256],
        reps: 7,
        seed: 88,
        degree: 0,
        p_one: 0.0,
        epsilon: 0.5,
    })
    .expect("bench");
    let trend = bench::trend_ok(&rows, 2.0);
    let cells: Vec<String> = rows
        .iter()
        .map(|r| format!("n={} λ={} w={} λ/√w={:.3}", r.n, r.median_phases, r.median_w, r.ratio))
        .collect();
    (quality, outcome(trend, format!("{} (each within 2x of n=64)", cells.join("; "))))
}

fn distinct_b(pairs: &[(usize, usize)], n: usize) -> bool {
    let a: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
    let b: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
    a.len() == n && b.len() == n
}

/// Heap Dijkstra over the point-level residual network.
fn point_distances(g: &BipartiteGraph, s: &MatchState) -> Vec<Option<i64>> {
    let arcs = residual_arcs(g, s);
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for &(u, v, slack, _) in &arcs {
        adj[u].push((v, slack));
    }
    let mut dist = vec![None; g.vertex_count()];
    let mut heap: BinaryHeap<Reverse<(i64, usize)>> = (g.n_a()..g.vertex_count())
        .filter(|&v| s.mate_edge(v).is_none())
        .map(|v| Reverse((0, v)))
        .collect();
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].is_some() {
            continue;
        }
        dist[v] = Some(d);
        for &(h, w) in &adj[v] {
            if dist[h].is_none() {
                heap.push(Reverse((d + w, h)));
            }
        }
    }
    dist
}

#[derive(Default)]
struct CompactExactness {
    states: usize,
    clusters: usize,
    mismatches: usize,
}

impl GeoObserver for CompactExactness {
    fn observe(&mut self, stage: GeoStage, view: &GeoView<'_>) {
        let checked = match stage {
            GeoStage::Preprocess => true,
            GeoStage::Stage2 { phase } => phase <= 3,
            _ => false,
        };
        if !checked {
            return;
        }
        self.states += 1;
        let point = point_distances(view.graph, view.state);
        let compact = view.compact.distances(view.grid);
        for (id, cluster) in view.compact.clusters().iter().enumerate() {
            if cluster.members.is_empty() {
                continue;
            }
            self.clusters += 1;
            let got = (compact[id] != u32::MAX).then_some(compact[id] as i64);
            let ok = match cluster.key.side {
                Side::A => cluster.members.iter().all(|&i| point[i] == got),
                Side::B => cluster.members.iter().filter_map(|&j| point[view.graph.n_a() + j]).min() == got,
            };
            self.mismatches += !ok as usize;
        }
    }
}

struct Both<'a>(&'a mut CompactExactness, &'a mut SpreadChecks);

impl GeoObserver for Both<'_> {
    fn observe(&mut self, stage: GeoStage, view: &GeoView<'_>) {
        self.0.observe(stage, view);
        self.1.observe(stage, view);
    }
}

fn ac9(spread: &mut SpreadChecks) -> Outcome {
    let mut rng = rng(9);
    let mut exact = CompactExactness::default();
    for i in 0..30 {
        let n = rand::Rng::gen_range(&mut rng, 2..=40);
        let dist = if i % 2 == 0 { Distribution::Uniform } else { Distribution::Clustered };
        let points: PointSet = random_points(&mut rng, n, dist);
        let options = BottleneckOptions {
            r: None,
            mode: LadderMode::ScanAll,
        };
        bottleneck_match_with(&points, 0.5, options, &mut Both(&mut exact, spread)).expect("geo run");
    }
    outcome(
        exact.mismatches == 0 && exact.states > 0,
        format!(
            "{} states, {} clusters compared, {} distance mismatches",
            exact.states, exact.clusters, exact.mismatches
        ),
    )
}

fn ac10(spread: &SpreadChecks) -> Outcome {
    outcome(
        spread.max_spread <= 2 && spread.max_values <= 3 && spread.max_clusters <= 3 && spread.states > 0,
        format!(
            "{} exposed states, max dual spread {}, max distinct duals per cell side {}, max clusters per cell side {}",
            spread.states, spread.max_spread, spread.max_values, spread.max_clusters
        ),
    )
}

fn main() {
    let start = Instant::now();
    let graphs = corpus(1, 500);
    let mut results: Vec<(&str, &str, Outcome)> = Vec::new();
    results.push(("AC1", "oracle equivalence", ac1(&graphs)));
    let (ac2, ac4) = ac2_ac4(&graphs);
    results.push(("AC2", "feasibility suite", ac2));
    results.push(("AC3", "phase and path bounds", ac3(&graphs[..100])));
    results.push(("AC4", "phase exhaustion", ac4));
    results.push(("AC5", "admissible cycles", ac5()));
    results.push(("AC6", "HK degeneration", ac6()));
    results.push(("AC7", "separator pipeline", ac7()));
    let mut spread = SpreadChecks::default();
    let (quality, trend) = ac8(&mut spread);
    results.push(("AC8", "bottleneck approximation", quality));
    results.push(("AC8", "phase-count trend", trend));
    results.push(("AC9", "compact distance equivalence", ac9(&mut spread)));
    results.push(("AC10", "dual spread", ac10(&spread)));

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("[{}] {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        results.len() - failed,
        results.len(),
        secs(start.elapsed())
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
