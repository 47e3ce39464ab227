//! Command-line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use zom::audit::{GeoAudit, InvariantAudit};
use zom::geo::{bottleneck_match_with, BottleneckOptions, LadderMode};
use zom::matcher::{run_matcher_with, NoObserver, PhaseObserver};
use zom::separator::{assign_weights_recursive, grid_graph_separator, lattice, SeparatorConfig};
use zom::{brute_force_max_matching, oracle_bottleneck, BipartiteGraph};

use crate::bench::{self, BenchConfig, Family};
use crate::format::{emit_graph, emit_points, read_graph, read_points};
use crate::generate::{random_graph, random_points, rng, Distribution, GraphSpec};
use crate::stats::StatsRecord;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "zom", version, about = "Bipartite matching with 0/1 weights and bottleneck point matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum matching of a graph file.
    MatchGraph(MatchGraphArgs),
    /// Approximate bottleneck matching of a point file.
    MatchBottleneck(MatchBottleneckArgs),
    /// Emit a seeded random instance.
    Gen(GenArgs),
    /// Cross-check seeded instances against the oracles and invariant checks.
    Verify(VerifyArgs),
    /// Phase count against sqrt(w) over a range of sizes.
    Bench(BenchArgs),
}

/// Where edge weights come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    File,
    /// Recursive lattice separators with target piece size `r`.
    Separator(usize),
}

impl FromStr for WeightSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "file" {
            return Ok(WeightSource::File);
        }
        match s.strip_prefix("separator:").map(str::parse) {
            Some(Ok(r)) if r > 0 => Ok(WeightSource::Separator(r)),
            _ => Err(format!("expected \"file\" or \"separator:<r>\" with r > 0, got {s:?}")),
        }
    }
}

#[derive(Debug, Args)]
pub struct MatchGraphArgs {
    pub file: PathBuf,
    #[arg(long, default_value = "file")]
    pub weights: WeightSource,
    /// Run the invariant checks at every stage; violations exit with status 2.
    #[arg(long)]
    pub audit: bool,
    /// Include the matched (a, b) pairs.
    #[arg(long)]
    pub pairs: bool,
    /// Record wall time (makes the output nondeterministic).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct MatchBottleneckArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Coarse-grid parameter, a perfect square.
    #[arg(long)]
    pub r: Option<usize>,
    /// Stop at the lowest perfect rung instead of scanning the whole ladder.
    #[arg(long)]
    pub first_perfect: bool,
    /// Skip the exact bottleneck oracle.
    #[arg(long)]
    pub no_oracle: bool,
    #[arg(long)]
    pub audit: bool,
    #[arg(long)]
    pub pairs: bool,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    #[arg(long, env = "ZOM_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    /// Write to a file instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    Graph {
        #[arg(long)]
        n_a: usize,
        #[arg(long)]
        n_b: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        p_one: f64,
    },
    Lattice {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    Points {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Distribution::Uniform)]
        dist: Distribution,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 50)]
    pub graphs: usize,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, env = "ZOM_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Family::Random)]
    pub family: Family,
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p_one: f64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, env = "ZOM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Print the rows as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

/// Runs one command and returns what goes to stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::MatchGraph(args) => match_graph(&args),
        Command::MatchBottleneck(args) => match_bottleneck(&args),
        Command::Gen(args) => gen(&args),
        Command::Verify(args) => verify(&args),
        Command::Bench(args) => run_bench(&args),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn match_graph(args: &MatchGraphArgs) -> Result<String, CliError> {
    let graph = read_graph(&args.file)?;
    let start = Instant::now();
    let (graph, algorithm) = match args.weights {
        WeightSource::File => (graph, "zero-one".to_string()),
        WeightSource::Separator(r) => {
            let weights = assign_weights_recursive(&graph, &SeparatorConfig::new(r), grid_graph_separator)
                .map_err(|e| CliError::Usage(format!("{}: {e}", args.file.display())))?;
            let g = weights.apply(&graph).map_err(|e| CliError::Invariant(e.to_string()))?;
            (g, format!("zero-one separator:{r}"))
        }
    };
    let mut audit = InvariantAudit::new();
    let observer: &mut dyn PhaseObserver = if args.audit { &mut audit } else { &mut NoObserver };
    let res = run_matcher_with(&graph, observer).map_err(|e| CliError::Invariant(e.to_string()))?;
    let mut rec = StatsRecord::from_match(&args.file.display().to_string(), &algorithm, &graph, &res);
    if args.timing {
        rec.wall_ms = Some(elapsed_ms(start));
    }
    if args.pairs {
        rec.pairs = Some(res.matching.iter().map(|&e| (graph.edge(e).a, graph.edge(e).b)).collect());
    }
    if !audit.report.is_clean() {
        return Err(CliError::Invariant(format!("{:?}", audit.report)));
    }
    Ok(rec.to_json() + "\n")
}

fn match_bottleneck(args: &MatchBottleneckArgs) -> Result<String, CliError> {
    let points = read_points(&args.file)?;
    let options = BottleneckOptions {
        r: args.r,
        mode: if args.first_perfect {
            LadderMode::FirstPerfect
        } else {
            LadderMode::ScanAll
        },
    };
    let start = Instant::now();
    let mut audit = GeoAudit::new();
    let res = if args.audit {
        bottleneck_match_with(&points, args.epsilon, options, &mut audit)
    } else {
        bottleneck_match_with(&points, args.epsilon, options, &mut NoObserver)
    };
    let res = res.map_err(|e| match e {
        zom::geo::GeoError::Invariant(e) => CliError::Invariant(e.to_string()),
        other => CliError::Usage(format!("{}: {other}", args.file.display())),
    })?;
    let wall = elapsed_ms(start);
    let oracle = if args.no_oracle {
        None
    } else {
        Some(oracle_bottleneck(&points).map_err(|e| CliError::Usage(e.to_string()))?.distance)
    };
    let mut rec = StatsRecord::from_bottleneck(&args.file.display().to_string(), &points, &res, oracle);
    if args.timing {
        rec.wall_ms = Some(wall);
    }
    if args.pairs {
        rec.pairs = Some(res.pairs.clone());
    }
    if !audit.is_clean() {
        return Err(CliError::Invariant(format!("{:?} {:?} {:?}", audit.report, audit.spread, audit.clusters)));
    }
    Ok(rec.to_json() + "\n")
}

fn write_out(out: &Option<PathBuf>, text: String) -> Result<String, CliError> {
    match out {
        None => Ok(text),
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn gen(args: &GenArgs) -> Result<String, CliError> {
    let mut rng = rng(args.seed);
    let text = match args.kind {
        GenKind::Graph { n_a, n_b, m, p_one } => {
            if !(0.0..=1.0).contains(&p_one) {
                return Err(CliError::Usage(format!("--p-one must lie in [0, 1], got {p_one}")));
            }
            emit_graph(&random_graph(&mut rng, &GraphSpec { n_a, n_b, m, p_one }))
        }
        GenKind::Lattice { rows, cols } => emit_graph(&lattice(rows, cols)),
        GenKind::Points { n, dist } => emit_points(&random_points(&mut rng, n, dist)),
    };
    write_out(&args.out, text)
}

struct GraphVerdict {
    oracle_equal: bool,
    audit_clean: bool,
    ledger_ok: bool,
    sum_bound: bool,
}

fn verify_graph(graph: &BipartiteGraph) -> Result<GraphVerdict, CliError> {
    let mut audit = if graph.vertex_count() <= 60 {
        InvariantAudit::with_cycle_check()
    } else {
        InvariantAudit::new()
    };
    let res = run_matcher_with(graph, &mut audit).map_err(|e| CliError::Invariant(e.to_string()))?;
    let oracle = brute_force_max_matching(graph);
    let l = &res.ledger;
    Ok(GraphVerdict {
        oracle_equal: res.size == oracle.matching_size,
        audit_clean: audit.report.is_clean(),
        ledger_ok: l.phases_within_limit() && l.path_weights_within_limit() && l.violations.is_empty(),
        sum_bound: l.affected_within_limit(),
    })
}

/// Graph checks are fatal except the affected-piece sum, which can exceed
/// the path-weight sum by up to one per path and is only counted.
fn verify(args: &VerifyArgs) -> Result<String, CliError> {
    if !(args.epsilon > 0.0 && args.epsilon <= 1.0) {
        return Err(CliError::Usage(format!("--epsilon must lie in (0, 1], got {}", args.epsilon)));
    }
    let mut rng = rng(args.seed);
    let mut failures = Vec::new();
    let (mut equal, mut clean, mut bounded, mut sums) = (0, 0, 0, 0);
    for i in 0..args.graphs {
        let spec = GraphSpec::sample(&mut rng);
        let g = random_graph(&mut rng, &spec);
        let v = verify_graph(&g)?;
        equal += v.oracle_equal as usize;
        clean += v.audit_clean as usize;
        bounded += v.ledger_ok as usize;
        sums += v.sum_bound as usize;
        if !(v.oracle_equal && v.audit_clean && v.ledger_ok) {
            failures.push(format!("graph {i} ({})", spec.describe()));
        }
    }
    let (mut within, mut geo_clean) = (0, 0);
    for i in 0..args.points {
        let n = rng.gen_range(1..=40);
        let dist = if i % 2 == 0 { Distribution::Uniform } else { Distribution::Clustered };
        let points = random_points(&mut rng, n, dist);
        let mut audit = GeoAudit::new();
        let res = bottleneck_match_with(&points, args.epsilon, BottleneckOptions::default(), &mut audit)
            .map_err(|e| CliError::Invariant(e.to_string()))?;
        let opt = oracle_bottleneck(&points).map_err(|e| CliError::Invariant(e.to_string()))?.distance;
        let ok = res.pairs.len() == n && res.bottleneck <= (1.0 + args.epsilon) * opt + 1e-12;
        within += ok as usize;
        geo_clean += audit.is_clean() as usize;
        if !(ok && audit.is_clean()) {
            failures.push(format!("point set {i} (n={n}, {dist:?})"));
        }
    }
    let g = args.graphs;
    let p = args.points;
    let mut out = format!(
        "{equal}/{g} oracle-equal\n{clean}/{g} invariant-clean\n{bounded}/{g} within phase and path-weight bounds\n{sums}/{g} with affected pieces <= path weight (informational)\n"
    );
    if p > 0 {
        out.push_str(&format!(
            "{within}/{p} within (1+{})x of the optimal bottleneck\n{geo_clean}/{p} geo invariant-clean\n",
            args.epsilon
        ));
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Invariant(format!("{out}failed: {}", failures.join(", "))))
    }
}

fn run_bench(args: &BenchArgs) -> Result<String, CliError> {
    let config = BenchConfig {
        family: args.family,
        sizes: args.sizes.clone(),
        reps: args.reps,
        seed: args.seed,
        degree: args.degree,
        p_one: args.p_one,
        epsilon: args.epsilon,
    };
    let rows = bench::run(&config)?;
    if args.json {
        Ok(serde_json::to_string(&rows).expect("rows serialize") + "\n")
    } else {
        Ok(bench::table(&rows))
    }
}
