//! `cfcc`: group current-flow closeness centrality from edge lists.
//!
//! Three subcommands: `select` runs one selection algorithm and reports the
//! chosen group, `eval` scores a given vertex set, `bench` compares
//! algorithms on the same input. Inputs are whitespace-separated edge lists
//! (`u v [weight]`, `#`/`%` comments); disconnected inputs are reduced to
//! their largest connected component with a notice on stderr.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O or unparsable input, 4 violated
//! precondition, 5 numerical failure.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use cfcc::centrality::{group_closeness_exact, group_closeness_solve};
use cfcc::graph::{largest_connected_component, parse_edge_list, Graph, VertexMap};
use cfcc::greedy_approx::approx_greedy;
use cfcc::greedy_exact::{
    exact_greedy_with_cap, random_selection, top_cent_selection, top_degree_selection, Selection,
};
use cfcc::laplacian::{assemble, ground, hutchinson_trace_detailed, Preconditioner, SolveOptions};
use cfcc::sketch::{DeltaPolicy, SketchConfig};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "cfcc",
    version,
    about = "Group current-flow closeness centrality: selection, evaluation, benchmarking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a k-vertex group maximizing group closeness.
    Select(SelectArgs),
    /// Evaluate the closeness of a given vertex set.
    Eval(EvalArgs),
    /// Compare selection algorithms on one input.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArg {
    /// Edge-list file: one `u v [weight]` per line.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Exact,
    Approx,
    Random,
    TopDegree,
    TopCent,
}

impl AlgoArg {
    fn name(self) -> &'static str {
        match self {
            AlgoArg::Exact => "exact",
            AlgoArg::Approx => "approx",
            AlgoArg::Random => "random",
            AlgoArg::TopDegree => "top-degree",
            AlgoArg::TopCent => "top-cent",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PrecondArg {
    Jacobi,
    Ic0,
    None,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dense,
    Solve,
    Hutchinson,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Dense => "dense",
            MethodArg::Solve => "solve",
            MethodArg::Hutchinson => "hutchinson",
        }
    }
}

/// Knobs shared by `select` and `bench`.
#[derive(Args)]
struct TuningArgs {
    /// Sketch accuracy parameter (approx only).
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    /// Projection rows per ln n (approx only).
    #[arg(long, default_value_t = cfcc::DEFAULT_JL_FACTOR)]
    jl_factor: f64,
    /// Seed for all randomized algorithms.
    #[arg(long, default_value_t = cfcc::DEFAULT_SEED)]
    seed: u64,
    /// Replace the theoretical solver-accuracy schedule by this fixed
    /// relative-residual target (approx only).
    #[arg(long)]
    practical_delta: Option<f64>,
    /// Preconditioner for iterative solves (approx only).
    #[arg(long, value_enum, default_value_t = PrecondArg::Jacobi)]
    precond: PrecondArg,
    /// Largest dimension the dense O(n²)-memory paths accept.
    #[arg(long, default_value_t = cfcc::DEFAULT_DENSE_CAP)]
    dense_cap: usize,
}

impl TuningArgs {
    fn sketch_config(&self) -> SketchConfig {
        SketchConfig {
            epsilon: self.epsilon,
            jl_factor: self.jl_factor,
            seed: self.seed,
            delta: match self.practical_delta {
                Some(delta) => DeltaPolicy::Practical { delta },
                None => DeltaPolicy::Theoretical,
            },
            preconditioner: match self.precond {
                PrecondArg::Jacobi => Preconditioner::Jacobi,
                PrecondArg::Ic0 => Preconditioner::Ic0,
                PrecondArg::None => Preconditioner::None,
            },
            ..SketchConfig::default()
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArg,
    /// Group size.
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArg,
    /// Comma-separated vertex labels, e.g. "3,17,42".
    #[arg(long)]
    set: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Dense)]
    method: MethodArg,
    /// Probe count for --method hutchinson.
    #[arg(long, default_value_t = 100)]
    probes: usize,
    #[arg(long, default_value_t = cfcc::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = cfcc::DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArg,
    /// Group size.
    #[arg(long)]
    k: usize,
    /// Comma-separated algorithms to compare.
    #[arg(long, value_delimiter = ',', required = true)]
    algos: Vec<AlgoArg>,
    /// Timing samples per algorithm; the median is reported.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

// ---------------------------------------------------------------------------
// Errors and exit codes.
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Lib(cfcc::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<cfcc::Error> for CliError {
    fn from(e: cfcc::Error) -> Self {
        CliError::Lib(e)
    }
}

fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Io(..) => 3,
        CliError::Lib(e) => match e {
            cfcc::Error::Parse { .. } => 3,
            cfcc::Error::Precondition(_)
            | cfcc::Error::Disconnected
            | cfcc::Error::DenseCapExceeded { .. }
            | cfcc::Error::EnumerationCapExceeded { .. }
            | cfcc::Error::UnknownLabel(_) => 4,
            cfcc::Error::SolverDidNotConverge { .. } | cfcc::Error::NumericalDegeneracy(_) => 5,
        },
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Select(args) => cmd_select(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Bench(args) => cmd_bench(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

// ---------------------------------------------------------------------------
// Input loading.
// ---------------------------------------------------------------------------

struct Loaded {
    graph: Graph,
    map: VertexMap,
    original_n: usize,
    reduced: bool,
    path: String,
}

fn load(input: &InputArg) -> Result<Loaded, CliError> {
    let text =
        fs::read_to_string(&input.input).map_err(|e| CliError::Io(input.input.clone(), e))?;
    let parsed = parse_edge_list(&text, 1.0)?;
    if parsed.self_loops_dropped > 0 {
        eprintln!("note: dropped {} self-loop(s)", parsed.self_loops_dropped);
    }
    let original_n = parsed.graph.n();
    let (graph, map) = largest_connected_component(&parsed.graph, &parsed.map)?;
    let reduced = graph.n() < original_n;
    if reduced {
        eprintln!(
            "note: input is disconnected; using the largest connected component \
             ({} of {original_n} vertices, {} edges)",
            graph.n(),
            graph.m()
        );
    }
    Ok(Loaded {
        graph,
        map,
        original_n,
        reduced,
        path: input.input.display().to_string(),
    })
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct StepReport {
    vertex: String,
    score: f64,
    closeness: f64,
    trace: f64,
    millis: f64,
    estimated: bool,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct SolverReport {
    solves: usize,
    iterations: u64,
    max_residual: f64,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct SelectReport {
    schema: u32,
    command: String,
    input: String,
    n: usize,
    m: usize,
    original_n: usize,
    lcc_reduced: bool,
    algorithm: String,
    k: usize,
    epsilon: Option<f64>,
    jl_factor: Option<f64>,
    seed: Option<u64>,
    chosen: Vec<String>,
    steps: Vec<StepReport>,
    total_millis: f64,
    solver: Option<SolverReport>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct EvalReport {
    schema: u32,
    command: String,
    input: String,
    n: usize,
    m: usize,
    original_n: usize,
    lcc_reduced: bool,
    set: Vec<String>,
    method: String,
    closeness: f64,
    trace: f64,
    std_error: Option<f64>,
    probes: Option<usize>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct BenchRow {
    algorithm: String,
    median_millis: f64,
    closeness: f64,
    trace: f64,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct BenchReport {
    schema: u32,
    command: String,
    input: String,
    n: usize,
    m: usize,
    original_n: usize,
    lcc_reduced: bool,
    k: usize,
    repeats: usize,
    rows: Vec<BenchRow>,
    closeness_ratio_approx_exact: Option<f64>,
}

fn emit_json<T: Serialize>(report: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// select
// ---------------------------------------------------------------------------

fn run_algorithm(
    algo: AlgoArg,
    g: &Graph,
    k: usize,
    tuning: &TuningArgs,
) -> cfcc::Result<Selection> {
    match algo {
        AlgoArg::Exact => exact_greedy_with_cap(g, k, tuning.dense_cap),
        AlgoArg::Approx => approx_greedy(g, k, &tuning.sketch_config()),
        AlgoArg::Random => random_selection(g, k, tuning.seed),
        AlgoArg::TopDegree => top_degree_selection(g, k),
        AlgoArg::TopCent => top_cent_selection(g, k, tuning.dense_cap),
    }
}

fn select_report(loaded: &Loaded, sel: &Selection, algo: AlgoArg) -> SelectReport {
    let steps: Vec<StepReport> = sel
        .chosen
        .iter()
        .enumerate()
        .map(|(i, &u)| StepReport {
            vertex: loaded.map.label(u).to_string(),
            score: sel.step_scores[i],
            closeness: sel.evals[i].closeness,
            trace: sel.evals[i].trace,
            millis: sel.step_millis[i],
            estimated: sel.evals[i].estimated,
        })
        .collect();
    SelectReport {
        schema: SCHEMA_VERSION,
        command: "select".into(),
        input: loaded.path.clone(),
        n: loaded.graph.n(),
        m: loaded.graph.m(),
        original_n: loaded.original_n,
        lcc_reduced: loaded.reduced,
        algorithm: algo.name().into(),
        k: sel.config.k,
        epsilon: sel.config.epsilon,
        jl_factor: sel.config.jl_factor,
        seed: sel.config.seed,
        chosen: sel
            .chosen
            .iter()
            .map(|&u| loaded.map.label(u).to_string())
            .collect(),
        steps,
        total_millis: sel.total_millis(),
        solver: sel.solver.map(|s| SolverReport {
            solves: s.solves,
            iterations: s.iterations,
            max_residual: s.max_residual,
        }),
    }
}

fn cmd_select(args: &SelectArgs) -> Result<(), CliError> {
    let loaded = load(&args.input)?;
    let sel = run_algorithm(args.algo, &loaded.graph, args.k, &args.tuning)?;
    let report = select_report(&loaded, &sel, args.algo);
    match args.format {
        Format::Json => emit_json(&report)?,
        Format::Csv => {
            println!("step,vertex,score,closeness,trace,millis,estimated");
            for (i, s) in report.steps.iter().enumerate() {
                println!(
                    "{},{},{},{},{},{},{}",
                    i + 1,
                    s.vertex,
                    s.score,
                    s.closeness,
                    s.trace,
                    s.millis,
                    s.estimated
                );
            }
        }
        Format::Text => {
            println!("algorithm: {}", report.algorithm);
            println!(
                "input: {} (n={}, m={}{})",
                report.input,
                report.n,
                report.m,
                if report.lcc_reduced {
                    format!(", reduced from n={}", report.original_n)
                } else {
                    String::new()
                }
            );
            println!("{:<5} {:<10} {:>14} {:>14} {:>14} {:>10}", "step", "vertex", "score", "closeness", "trace", "millis");
            for (i, s) in report.steps.iter().enumerate() {
                println!(
                    "{:<5} {:<10} {:>14.6} {:>14.6} {:>14.6} {:>10.3}{}",
                    i + 1,
                    s.vertex,
                    s.score,
                    s.closeness,
                    s.trace,
                    s.millis,
                    if s.estimated { "  (estimated)" } else { "" }
                );
            }
            println!("chosen: {}", report.chosen.join(","));
            if let Some(last) = report.steps.last() {
                println!("closeness: {:.6}", last.closeness);
            }
            println!("total: {:.3} ms", report.total_millis);
            if let Some(solver) = &report.solver {
                println!(
                    "solver: {} solves, {} iterations, max residual {:.3e}",
                    solver.solves, solver.iterations, solver.max_residual
                );
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn parse_set(spec: &str, map: &VertexMap) -> Result<Vec<usize>, CliError> {
    let mut ids = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let id = map
            .id_of(token)
            .ok_or_else(|| CliError::Lib(cfcc::Error::UnknownLabel(token.to_string())))?;
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(CliError::Usage("--set must name at least one vertex".into()));
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let loaded = load(&args.input)?;
    let ids = parse_set(&args.set, &loaded.map)?;
    let g = &loaded.graph;

    let (closeness, trace, std_error, probes) = match args.method {
        MethodArg::Dense => {
            let v = group_closeness_exact(g, &ids, args.dense_cap)?;
            (v.closeness, v.trace, None, None)
        }
        MethodArg::Solve => {
            let v = group_closeness_solve(g, &ids, &SolveOptions::m_norm(1e-8))?;
            (v.closeness, v.trace, None, None)
        }
        MethodArg::Hutchinson => {
            let gl = ground(&assemble(g), &ids)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let out = hutchinson_trace_detailed(
                &gl,
                args.probes,
                &SolveOptions::residual(1e-8),
                &mut rng,
            )?;
            (
                g.n() as f64 / out.trace,
                out.trace,
                Some(out.std_error),
                Some(out.probes),
            )
        }
    };

    let report = EvalReport {
        schema: SCHEMA_VERSION,
        command: "eval".into(),
        input: loaded.path.clone(),
        n: g.n(),
        m: g.m(),
        original_n: loaded.original_n,
        lcc_reduced: loaded.reduced,
        set: ids.iter().map(|&u| loaded.map.label(u).to_string()).collect(),
        method: args.method.name().into(),
        closeness,
        trace,
        std_error,
        probes,
    };
    match args.format {
        Format::Json => emit_json(&report)?,
        Format::Csv => {
            println!("set,method,closeness,trace,std_error");
            println!(
                "{},{},{},{},{}",
                report.set.join(";"),
                report.method,
                report.closeness,
                report.trace,
                report.std_error.map_or(String::new(), |e| e.to_string())
            );
        }
        Format::Text => {
            println!("set: {}", report.set.join(","));
            println!("method: {}", report.method);
            println!("closeness: {:.6}", report.closeness);
            println!("trace: {:.6}", report.trace);
            if let Some(e) = report.std_error {
                println!("std error: {:.6} ({} probes)", e, report.probes.unwrap_or(0));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let loaded = load(&args.input)?;

    let mut algos = Vec::new();
    for &a in &args.algos {
        if !algos.contains(&a) {
            algos.push(a);
        }
    }

    let mut rows = Vec::new();
    for &algo in &algos {
        let mut times = Vec::with_capacity(args.repeats);
        let mut last = None;
        for _ in 0..args.repeats {
            let sel = run_algorithm(algo, &loaded.graph, args.k, &args.tuning)?;
            times.push(sel.total_millis());
            last = Some(sel);
        }
        let sel = last.expect("repeats ≥ 1");
        let eval = sel.evals.last().expect("selection evaluated");
        rows.push(BenchRow {
            algorithm: algo.name().into(),
            median_millis: median(&mut times),
            closeness: eval.closeness,
            trace: eval.trace,
        });
    }

    let find = |name: &str| rows.iter().find(|r| r.algorithm == name);
    let ratio = match (find("approx"), find("exact")) {
        (Some(a), Some(e)) => Some(a.closeness / e.closeness),
        _ => None,
    };

    let report = BenchReport {
        schema: SCHEMA_VERSION,
        command: "bench".into(),
        input: loaded.path.clone(),
        n: loaded.graph.n(),
        m: loaded.graph.m(),
        original_n: loaded.original_n,
        lcc_reduced: loaded.reduced,
        k: args.k,
        repeats: args.repeats,
        rows,
        closeness_ratio_approx_exact: ratio,
    };
    match args.format {
        Format::Json => emit_json(&report)?,
        Format::Csv => {
            println!("algorithm,median_millis,closeness,trace");
            for r in &report.rows {
                println!("{},{},{},{}", r.algorithm, r.median_millis, r.closeness, r.trace);
            }
        }
        Format::Text => {
            println!(
                "input: {} (n={}, m={}), k={}, repeats={}",
                report.input, report.n, report.m, report.k, report.repeats
            );
            println!("{:<12} {:>14} {:>14} {:>14}", "algorithm", "median ms", "closeness", "trace");
            for r in &report.rows {
                println!(
                    "{:<12} {:>14.3} {:>14.6} {:>14.6}",
                    r.algorithm, r.median_millis, r.closeness, r.trace
                );
            }
            if let Some(ratio) = report.closeness_ratio_approx_exact {
                println!("closeness ratio approx/exact: {ratio:.4}");
            }
        }
    }
    Ok(())
}
