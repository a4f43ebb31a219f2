//! `qgraph`: batch front end for graph documents, searches and the web service.
//!
//! Data goes to stdout, diagnostics to stderr. Exit codes:
//! 0 success, 1 I/O or internal failure, 2 usage error, 3 unparsable document,
//! 4 invalid graph or configuration, 5 infeasible search or rejected analyzer.

use std::fmt::Display;
use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use qgraph_core::discovery::{discover, validate_config, verify_analyzer, ProgressEvent, Task};
use qgraph_core::io::{
    analyzer_doc, cancellation_doc, decode_graph, decode_search_template, encode_graph, encode_search_template,
    encode_state, matchings_doc, render_report, search_config_from_graph, search_summary_doc, GraphFile, StateDocument,
    GRAPH_EXTENSION,
};
use qgraph_core::layout::{kamada_kawai_3d, LayoutSettings};
use qgraph_core::{
    compute_state, enumerate_perfect_matchings, find_cancellations, normalize_state, parse_target, validate_graph,
    Complex64, Error as EngineError, Ket, QuantumState, TargetState,
};
use qgraph_service::ServiceConfig;

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_REJECTED: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Colored-graph workbench for post-selected photonic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a graph document against the graph invariants.
    Validate { graph: PathBuf },
    /// Print the normalized post-selected state and the raw norm.
    State {
        graph: PathBuf,
        /// Emit the state document instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Count perfect matchings.
    Matchings {
        graph: PathBuf,
        /// Also print every matching with its amplitude.
        #[arg(long)]
        list: bool,
        #[arg(long)]
        json: bool,
    },
    /// Show which matchings produce a ket and how they interfere.
    Cancellations {
        graph: PathBuf,
        #[arg(long)]
        ket: String,
        #[arg(long)]
        json: bool,
    },
    /// Compute a 3D layout and write it into a copy of the graph document.
    Layout {
        graph: PathBuf,
        /// Defaults to `<name>.layout.graph` next to the input.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
    },
    /// Run a search template: optimize, prune, write the resulting graph.
    Discover {
        template: PathBuf,
        /// Result graph path; defaults to `<name>.result.graph` next to the template.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        overrides: SearchOverrides,
        /// Print progress events to stderr.
        #[arg(long)]
        progress: bool,
        #[arg(long)]
        json: bool,
    },
    /// Emit a search template whose initial geometry is the graph's edge set.
    Template {
        graph: PathBuf,
        /// ghz:n,d | bell:d | swap:n,d
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "generation")]
        task: String,
        #[command(flatten)]
        overrides: SearchOverrides,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that an analyzer graph projects onto the target.
    VerifyAnalyzer {
        graph: PathBuf,
        /// ghz:n,d | bell:d | swap:n,d
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Start the web service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct SearchOverrides {
    #[arg(long)]
    seed: Option<u64>,
    /// Pruning threshold on the loss.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "QGRAPH_HOST", default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, env = "QGRAPH_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "QGRAPH_LIBRARY", default_value = "library")]
    library: PathBuf,
    /// Search worker count; defaults to the number of hardware threads.
    #[arg(long, env = "QGRAPH_WORKERS")]
    workers: Option<usize>,
    /// Seconds a finished job stays queryable.
    #[arg(long, env = "QGRAPH_JOB_TTL", default_value_t = 86_400)]
    job_ttl: u64,
    /// Append-only JSON-lines job log.
    #[arg(long, env = "QGRAPH_JOB_LOG")]
    job_log: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Failure { code, message: message.to_string() }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::new(EXIT_INVALID, e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<GraphFile, Failure> {
    let file = decode_graph(&read(path)?).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let report = validate_graph(&file.graph);
    if !report.is_ok() {
        return Err(Failure::new(EXIT_INVALID, format!("{}: {report}", path.display())));
    }
    Ok(file)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
    path.with_file_name(format!("{stem}.{suffix}.{GRAPH_EXTENSION}"))
}

fn complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

fn report<T: serde::Serialize>(doc: &T) -> Outcome {
    print!("{}", render_report(doc).map_err(|e| Failure::new(EXIT_FAILURE, e))?);
    Ok(())
}

fn validate(path: &Path) -> Outcome {
    let file = decode_graph(&read(path)?).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let result = validate_graph(&file.graph);
    if result.is_ok() {
        println!("ok: {} vertices, {} edges", file.graph.num_vertices(), file.graph.num_edges());
        Ok(())
    } else {
        for v in &result.violations {
            println!("{}: {v}", v.kind());
        }
        Err(Failure::new(EXIT_INVALID, format!("{} violation(s)", result.violations.len())))
    }
}

fn state(path: &Path, json: bool) -> Outcome {
    let mut g = load_graph(path)?.graph;
    g.canonicalize();
    let raw = compute_state(&g)?;
    let norm = raw.norm();
    let unit = if norm > 0.0 { normalize_state(&raw)? } else { QuantumState::new(raw.dims().to_vec()) };
    if json {
        let doc = encode_state(&StateDocument { state: unit, norm }).map_err(|e| Failure::new(EXIT_FAILURE, e))?;
        print!("{doc}");
        return Ok(());
    }
    if norm == 0.0 {
        println!("state vanishes: every term cancels");
    }
    for (ket, amp) in unit.amplitudes() {
        println!("|{ket}>  {}", complex(*amp));
    }
    println!("norm {norm}");
    Ok(())
}

fn matchings(path: &Path, list: bool, json: bool) -> Outcome {
    let mut g = load_graph(path)?.graph;
    g.canonicalize();
    let all = enumerate_perfect_matchings(&g);
    let doc = matchings_doc(&g, &all);
    if json {
        return report(&doc);
    }
    println!("{}", doc.count);
    if list {
        for m in &doc.matchings {
            let edges: Vec<String> = m.edges.iter().map(|e| format!("({},{},{},{})", e[0], e[1], e[2], e[3])).collect();
            println!("{}  {}", edges.join(" "), complex(m.amplitude.into()));
        }
    }
    Ok(())
}

fn cancellations(path: &Path, ket: &str, json: bool) -> Outcome {
    let mut g = load_graph(path)?.graph;
    g.canonicalize();
    let ket: Ket = ket.parse().map_err(|e| Failure::new(2, format!("--ket: {e}")))?;
    let r = find_cancellations(&g, &ket)?;
    let doc = cancellation_doc(&g, &r);
    if json {
        return report(&doc);
    }
    println!("ket |{}>: {} contribution(s), net {}", doc.ket, doc.contributions.len(), complex(doc.net.into()));
    for (i, c) in doc.contributions.iter().enumerate() {
        let edges: Vec<String> = c.edges.iter().map(|e| format!("({},{},{},{})", e[0], e[1], e[2], e[3])).collect();
        println!("  [{i}] {}  {}", edges.join(" "), complex(c.amplitude.into()));
    }
    for p in &doc.interference {
        for c in &p.cycles {
            let path: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
            println!("  [{}] x [{}] interfere on the {}-cycle {}", p.first, p.second, c.edges.len(), path.join("-"));
        }
    }
    println!("{}", if doc.cancelled { "cancelled" } else { "survives" });
    Ok(())
}

fn layout(path: &Path, output: Option<PathBuf>, seed: u64, max_iters: usize) -> Outcome {
    let file = load_graph(path)?;
    let result = kamada_kawai_3d(&file.graph, &LayoutSettings { seed, max_iters, ..Default::default() });
    let out = output.unwrap_or_else(|| sibling(path, "layout"));
    let doc = encode_graph(&file.with_positions(&result.positions)).map_err(|e| Failure::new(EXIT_FAILURE, e))?;
    write(&out, &doc)?;
    eprintln!("stress {} after {} sweep(s); wrote {}", result.stress, result.trace.len() - 1, out.display());
    Ok(())
}

fn apply(config: &mut qgraph_core::discovery::SearchConfig, o: &SearchOverrides) {
    if let Some(seed) = o.seed {
        config.seed = seed;
    }
    if let Some(tau) = o.tau {
        config.pruning.threshold = tau;
    }
    if let Some(restarts) = o.restarts {
        config.optimizer.restarts = restarts;
    }
}

fn discover_cmd(path: &Path, output: Option<PathBuf>, o: &SearchOverrides, progress: bool, json: bool) -> Outcome {
    let mut config = decode_search_template(&read(path)?)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    apply(&mut config, o);
    validate_config(&config)?;
    let print_progress = |e: &ProgressEvent| match e {
        ProgressEvent::Phase { phase, edge_count } => eprintln!("{} ({edge_count} edges)", phase.as_str()),
        ProgressEvent::RestartBest { restart, loss } => eprintln!("  restart {restart}: loss {loss:.3e}"),
        ProgressEvent::EdgeRemoved { edge_count, loss } => {
            eprintln!("  removed edge -> {edge_count} edges, loss {loss:.3e}")
        }
        ProgressEvent::Done { .. } => {}
    };
    let quiet = |_: &ProgressEvent| {};
    let result = if progress { discover(&config, &print_progress)? } else { discover(&config, &quiet)? };

    let out = output.unwrap_or_else(|| sibling(path, "result"));
    let doc = encode_graph(&GraphFile::new(result.graph.clone())).map_err(|e| Failure::new(EXIT_FAILURE, e))?;
    write(&out, &doc)?;
    let summary = search_summary_doc(&result);
    if json {
        report(&summary)?;
    } else {
        println!("edges {} -> {}", summary.initial_edges, summary.edge_count);
        println!("loss {}", summary.loss);
        let trace: Vec<String> = summary.loss_trace.iter().map(|l| format!("{l:.3e}")).collect();
        println!("loss trace {}", trace.join(" "));
        println!("feasible {}", summary.feasible);
    }
    eprintln!("wrote {}", out.display());
    if result.feasible {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_REJECTED,
            format!("no solution at threshold {}: best loss {}", config.pruning.threshold, result.loss),
        ))
    }
}

fn template(path: &Path, target: &str, task: &str, o: &SearchOverrides, output: Option<PathBuf>) -> Outcome {
    let file = load_graph(path)?;
    let target = parse_target(target)?;
    let task: Task = task.parse()?;
    let mut config = search_config_from_graph(&file.graph, target, task);
    apply(&mut config, o);
    validate_config(&config)?;
    let doc = encode_search_template(&config).map_err(|e| Failure::new(EXIT_FAILURE, e))?;
    match output {
        Some(out) => write(&out, &doc),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn verify(path: &Path, target: &str, tol: f64, json: bool) -> Outcome {
    let g = load_graph(path)?.graph;
    let target: TargetState = parse_target(target)?;
    let r = verify_analyzer(&g, &target, tol);
    if json {
        report(&analyzer_doc(&r).map_err(|e| Failure::new(EXIT_FAILURE, e))?)?;
    } else {
        println!("{}", if r.is_valid { "valid" } else { "invalid" });
        if let Some(reason) = &r.reason {
            println!("reason: {reason}");
        }
        if let Some(scale) = r.scale {
            println!("scale {}", complex(scale));
        }
        for (ket, amp) in &r.offending {
            println!("offending |{ket}>  {}", complex(*amp));
        }
    }
    if r.is_valid {
        Ok(())
    } else {
        Err(Failure::new(EXIT_REJECTED, format!("analyzer does not project onto {}", target.label())))
    }
}

fn serve(args: ServeArgs) -> Outcome {
    let defaults = ServiceConfig::default();
    let config = ServiceConfig {
        addr: SocketAddr::new(args.host, args.port),
        library_dir: args.library,
        workers: args.workers.unwrap_or(defaults.workers),
        job_ttl: Duration::from_secs(args.job_ttl),
        job_log: args.job_log,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(EXIT_FAILURE, e))?;
    runtime.block_on(qgraph_service::serve(config)).map_err(|e| Failure::new(EXIT_FAILURE, e))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { graph } => validate(&graph),
        Command::State { graph, json } => state(&graph, json),
        Command::Matchings { graph, list, json } => matchings(&graph, list, json),
        Command::Cancellations { graph, ket, json } => cancellations(&graph, &ket, json),
        Command::Layout { graph, output, seed, max_iters } => layout(&graph, output, seed, max_iters),
        Command::Discover { template, output, overrides, progress, json } => {
            discover_cmd(&template, output, &overrides, progress, json)
        }
        Command::Template { graph, target, task, overrides, output } => {
            template(&graph, &target, &task, &overrides, output)
        }
        Command::VerifyAnalyzer { graph, target, tol, json } => verify(&graph, &target, tol, json),
        Command::Serve(args) => serve(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qgraph: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
