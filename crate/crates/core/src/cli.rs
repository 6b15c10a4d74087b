//! The `pegasus` command line.
//!
//! Node ids on the command line and in every output are internal ids: the
//! dense `0..|V|` numbering assigned by the edge-list loader in ascending
//! order of the ids in the file. `summarize` writes the mapping back to the
//! file ids next to its output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributed::{run_scenario, Scenario};
use crate::engine::{summarize, EngineConfig, RunReport};
use crate::eval::{run_query_accuracy_experiment, write_csv, write_jsonl, ResultRow};
use crate::graph::{effective_diameter, generate_ba, generate_two_community, generate_ws, load_edge_list, write_edge_list, write_id_map};
use crate::query::{answer, write_tsv, QueryKind, SummaryTopology};
use crate::summary::{read_pgs, write_pgs};
use crate::{Error, Graph, NodeId, Result, SummaryGraph, TargetSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "pegasus", version, about = "Personalized graph summarization")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, env = "PEGASUS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for query fan-out (default: all cores).
    #[arg(long, global = true, env = "PEGASUS_THREADS")]
    pub threads: Option<usize>,
    /// Log filter, e.g. `info` or `pegasus=debug`.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Summarize an edge list within a size budget.
    Summarize(SummarizeArgs),
    /// Answer an RWR, HOP or PHP query from a summary or the raw graph.
    Query(QueryArgs),
    /// Score summaries against exact answers on the input graph.
    Evaluate(EvaluateArgs),
    /// Run a distributed-deployment scenario.
    Distsim(DistsimArgs),
    /// Write a synthetic graph as an edge list.
    Generate(GenerateArgs),
    /// Print node and edge counts, size in bits and effective diameter.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output PGS file. The run report goes to `<output>.report.json` and
    /// the id map to `<output>.ids`.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Target node file, one internal id per line.
    #[arg(long, group = "target_choice")]
    pub targets: Option<PathBuf>,
    /// Use every node as a target (the default).
    #[arg(long, group = "target_choice")]
    pub targets_all: bool,
    /// Sample this many targets uniformly with the run seed.
    #[arg(long, group = "target_choice")]
    pub targets_sample: Option<usize>,
    /// Budget as a fraction of the input size in bits.
    #[arg(long, group = "budget", required = true)]
    pub budget_ratio: Option<f64>,
    #[arg(long, group = "budget")]
    pub budget_bits: Option<f64>,
    #[arg(long, default_value_t = 1.25)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, default_value_t = 500)]
    pub group_cap: usize,
    /// Record every merge in the run report.
    #[arg(long)]
    pub audit: bool,
    /// Keep self-loops as an error and skip the largest-component filter.
    #[arg(long)]
    pub no_preprocess: bool,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    /// A PGS summary, or an edge list with `--exact`.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long = "type", value_name = "KIND")]
    pub kind: QueryKind,
    #[arg(long)]
    pub node: NodeId,
    /// Treat the input as the raw graph and answer exactly.
    #[arg(long)]
    pub exact: bool,
    /// Only the K largest values, in descending order.
    #[arg(long, value_name = "K")]
    pub top: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// The input edge list the summaries were built from.
    #[arg(short, long)]
    pub graph: PathBuf,
    /// PGS summaries to score. A `<summary>.report.json` next to each one
    /// supplies alpha, beta and budget ratio for the rows.
    #[arg(short, long, required = true)]
    pub summary: Vec<PathBuf>,
    /// Number of query nodes, sampled with the run seed.
    #[arg(long, default_value_t = 100, conflicts_with = "query_file")]
    pub queries: usize,
    /// Query node file, one internal id per line.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [QueryKind::Rwr, QueryKind::Hop])]
    pub kinds: Vec<QueryKind>,
    /// Dataset label for the rows (default: the graph file stem).
    #[arg(long)]
    pub dataset: Option<String>,
    /// Emit CSV instead of JSON lines.
    #[arg(long)]
    pub csv: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistsimArgs {
    /// Scenario JSON; relative paths inside resolve against its directory.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub csv: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Ba,
    Ws,
    TwoCommunity,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// Node count; per community for `two-community`.
    #[arg(long)]
    pub n: usize,
    /// Edges per new node (BA models).
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Ring degree (WS).
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Rewiring probability (WS).
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Random edges between the communities.
    #[arg(long, default_value_t = 50)]
    pub bridges: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub percentile: f64,
    #[arg(long)]
    pub no_preprocess: bool,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Parse { .. } | Error::Json(_) | Error::EmptyGraph | Error::InvalidSummary(_) => {
            EXIT_PARSE
        }
        Error::BudgetInfeasible { .. } => EXIT_INFEASIBLE,
        Error::Machine { source, .. } => exit_code(source),
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.global.log_level)
        .try_init();
    if let Some(threads) = cli.global.threads {
        // Already set when `run` is called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Summarize(a) => cmd_summarize(a, seed),
        Command::Query(a) => cmd_query(a),
        Command::Evaluate(a) => cmd_evaluate(a, seed),
        Command::Distsim(a) => cmd_distsim(a),
        Command::Generate(a) => cmd_generate(a, seed),
        Command::Stats(a) => cmd_stats(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut out: impl Write, path: Option<&Path>) -> Result<()> {
    out.flush().map_err(|e| Error::io(path.unwrap_or(Path::new("<stdout>")), e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_summary(path: &Path) -> Result<SummaryGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pgs(BufReader::new(file))
}

fn cmd_summarize(a: &SummarizeArgs, seed: u64) -> Result<()> {
    let loaded = load_edge_list(&a.input, !a.no_preprocess)?;
    let graph = &loaded.graph;
    let n = graph.node_count();
    let targets = match (&a.targets, a.targets_sample) {
        (Some(path), _) => TargetSet::load(path, n)?,
        (None, Some(count)) => TargetSet::sample(n, count, seed)?,
        (None, None) => TargetSet::all(n)?,
    };
    let mut config = match (a.budget_ratio, a.budget_bits) {
        (Some(r), _) => EngineConfig::with_budget_ratio(graph, r)?,
        (None, Some(k)) => EngineConfig::with_budget(k),
        (None, None) => unreachable!("clap requires a budget"),
    };
    config.alpha = a.alpha;
    config.beta = a.beta;
    config.max_iterations = a.iters;
    config.group_cap = a.group_cap;
    config.seed = seed;
    config.audit = a.audit;

    let out = summarize(graph, &targets, &config)?;
    log::info!(
        "{} merges in {} iterations, {:.1} of {:.1} bits",
        out.report.merges,
        out.report.iterations_used,
        out.report.final_size_bits,
        out.report.budget_bits
    );

    let mut pgs = create(&a.output)?;
    write_pgs(&out.summary, &mut pgs).map_err(|e| Error::io(&a.output, e))?;
    finish(pgs, Some(&a.output))?;

    let report_path = a.report.clone().unwrap_or_else(|| with_suffix(&a.output, ".report.json"));
    let mut report = create(&report_path)?;
    serde_json::to_writer_pretty(&mut report, &out.report)?;
    writeln!(report).map_err(|e| Error::io(&report_path, e))?;
    finish(report, Some(&report_path))?;

    let ids_path = with_suffix(&a.output, ".ids");
    let mut ids = create(&ids_path)?;
    write_id_map(&loaded.original_ids, &mut ids).map_err(|e| Error::io(&ids_path, e))?;
    finish(ids, Some(&ids_path))
}

fn cmd_query(a: &QueryArgs) -> Result<()> {
    let ans = if a.exact {
        let graph = load_edge_list(&a.input, true)?.graph;
        answer(&graph, a.kind, a.node)?
    } else {
        let summary = load_summary(&a.input)?;
        answer(&SummaryTopology::new(&summary), a.kind, a.node)?
    };
    if !ans.converged {
        log::warn!("answer did not converge after {} iterations", ans.iterations);
    }
    let out = sink(a.output.as_deref())?;
    let mut out = out;
    write_tsv(&ans, a.top, &mut out)?;
    finish(out, a.output.as_deref())
}

/// Summary label and the report fields that describe how it was built.
fn summary_meta(path: &Path) -> Result<(String, Option<RunReport>)> {
    let label = path.display().to_string();
    let report_path = with_suffix(path, ".report.json");
    if !report_path.exists() {
        return Ok((label, None));
    }
    let file = File::open(&report_path).map_err(|e| Error::io(&report_path, e))?;
    Ok((label, Some(serde_json::from_reader(BufReader::new(file))?)))
}

fn cmd_evaluate(a: &EvaluateArgs, seed: u64) -> Result<()> {
    let graph = load_edge_list(&a.graph, true)?.graph;
    let n = graph.node_count();
    let queries = match &a.query_file {
        Some(path) => TargetSet::load(path, n)?.nodes().to_vec(),
        None if a.queries == 0 => Vec::new(),
        None => TargetSet::sample(n, a.queries.min(n), seed)?.nodes().to_vec(),
    };
    let dataset = a.dataset.clone().unwrap_or_else(|| {
        a.graph
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
    });

    let mut rows = Vec::new();
    if !queries.is_empty() {
        let mut loaded = Vec::new();
        for path in &a.summary {
            let summary = load_summary(path)?;
            if summary.node_count() != n {
                return Err(Error::LengthMismatch(summary.node_count(), n));
            }
            let (label, report) = summary_meta(path)?;
            loaded.push((label, summary, report));
        }
        let views: Vec<(&str, &SummaryGraph)> = loaded.iter().map(|(l, s, _)| (l.as_str(), s)).collect();
        let reports = run_query_accuracy_experiment(&graph, &views, &queries, &a.kinds)?;
        let size = graph.size_bits();
        for r in reports {
            let (_, _, run) = loaded.iter().find(|(l, _, _)| *l == r.label).expect("label from input");
            // Without a run report the build parameters are unknown.
            let (seed, alpha, beta, budget_ratio, wall_ms) = match run {
                Some(run) => (
                    run.config.seed,
                    run.config.alpha,
                    run.config.beta,
                    run.budget_bits / size,
                    run.wall_ms,
                ),
                None => (seed, f64::NAN, f64::NAN, f64::NAN, 0),
            };
            rows.push(ResultRow {
                dataset: dataset.clone(),
                seed,
                alpha,
                beta,
                budget_ratio,
                kind: r.kind,
                smape_sum: r.smape_sum,
                smape_mean: r.smape_mean,
                spearman: r.spearman,
                compression_rate: r.compression_rate,
                wall_ms,
                deployment: None,
            });
        }
    }
    emit(&rows, a.csv, a.output.as_deref())
}

fn emit(rows: &[ResultRow], csv: bool, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    if csv {
        write_csv(rows, &mut out)?;
    } else {
        write_jsonl(rows, &mut out)?;
    }
    finish(out, path)
}

fn cmd_distsim(a: &DistsimArgs) -> Result<()> {
    let file = File::open(&a.scenario).map_err(|e| Error::io(&a.scenario, e))?;
    let mut scenario: Scenario = serde_json::from_reader(BufReader::new(file))?;
    let base = a.scenario.parent().unwrap_or(Path::new("."));
    if let Some(dir) = &scenario.output_dir {
        scenario.output_dir = Some(base.join(dir));
    }
    let graph = scenario.graph.load(base)?;
    let rows = run_scenario(&scenario, &graph)?;
    emit(&rows, a.csv, a.output.as_deref())
}

fn cmd_generate(a: &GenerateArgs, seed: u64) -> Result<()> {
    let graph = match a.model {
        Model::Ba => generate_ba(a.n, a.m, seed)?,
        Model::Ws => generate_ws(a.n, a.k, a.p, seed)?,
        Model::TwoCommunity => generate_two_community(a.n, a.m, a.bridges, seed)?,
    };
    let path = a.output.as_deref();
    let mut out = sink(path)?;
    write_edge_list(&graph, &mut out).map_err(|e| Error::io(path.unwrap_or(Path::new("<stdout>")), e))?;
    finish(out, path)
}

fn stats_line(graph: &Graph, percentile: f64) -> Result<String> {
    let diameter = match effective_diameter(graph, percentile) {
        Ok(d) => d.to_string(),
        Err(Error::Disconnected) => "n/a".to_owned(),
        Err(e) => return Err(e),
    };
    Ok(format!(
        "nodes={} edges={} size_bits={:.4} effective_diameter={diameter}",
        graph.node_count(),
        graph.edge_count(),
        graph.size_bits()
    ))
}

fn cmd_stats(a: &StatsArgs) -> Result<()> {
    let graph = load_edge_list(&a.input, !a.no_preprocess)?.graph;
    println!("{}", stats_line(&graph, a.percentile)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::Parse { line: 1, message: String::new() }), EXIT_PARSE);
        assert_eq!(
            exit_code(&Error::BudgetInfeasible {
                budget_bits: 1.0,
                residual_bits: 2.0
            }),
            EXIT_INFEASIBLE
        );
        assert_eq!(exit_code(&Error::InvalidParameter(String::new())), EXIT_INVALID);
        let nested = Error::Machine {
            machine: 1,
            source: Box::new(Error::EmptyGraph),
        };
        assert_eq!(exit_code(&nested), EXIT_PARSE);
    }

    #[test]
    fn usage_errors_are_invalid_params() {
        assert_eq!(run(["pegasus", "summarize"]), EXIT_INVALID);
        assert_eq!(run(["pegasus", "--help"]), EXIT_OK);
    }

    #[test]
    fn toy_stats_line() {
        let g = Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        assert!(stats_line(&g, 0.9).unwrap().starts_with("nodes=5 edges=6 size_bits=27.8631 "));
    }

    #[test]
    fn suffixes_append() {
        assert_eq!(with_suffix(Path::new("a/out.pgs"), ".ids"), PathBuf::from("a/out.pgs.ids"));
    }
}
