//! Command-line front end. Errors go to stderr as one JSON object and map to
//! the exit codes below.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `validate`: the embedding is not valid |
//! | 2 | bad command line |
//! | 3 | input file unreadable, malformed or violating a schema invariant |
//! | 4 | solve failed or did not converge |
//! | 5 | edit rejected |
//! | 6 | adjacency could not be resolved |
//! | 7 | roof not planar enough to export |
//! | 8 | output could not be written, or the server failed |

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::adjacency::{self, AdjacencyError};
use crate::editing::{EditError, EditSession};
use crate::energy::MetricKind;
use crate::io::{self, DualDocument, ExportOptions, IoError, RoofDocument};
use crate::solver::{self, SolveError, SolveMode, SolveResult, SolveSpec};
use crate::validity;

pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_SOLVE: i32 = 4;
pub const EXIT_EDIT: i32 = 5;
pub const EXIT_ADJACENCY: i32 = 6;
pub const EXIT_EXPORT: i32 = 7;
pub const EXIT_OUTPUT: i32 = 8;

#[derive(Debug, Parser)]
#[command(
    name = "roofforge",
    version,
    about = "Roof graph reconstruction and editing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Strategy {
    Greedy,
    Sampling,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Metric {
    SmallestEig,
    Det,
    Proj,
    Diag,
}

impl From<Metric> for MetricKind {
    fn from(m: Metric) -> Self {
        match m {
            Metric::SmallestEig => MetricKind::SmallestEig,
            Metric::Det => MetricKind::Det,
            Metric::Proj => MetricKind::Proj,
            Metric::Diag => MetricKind::Diag,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a roof from a primal or dual file and export a building OBJ.
    Reconstruct {
        #[arg(long, conflicts_with = "dual", required_unless_present = "dual")]
        primal: Option<PathBuf>,
        #[arg(long)]
        dual: Option<PathBuf>,
        #[arg(long)]
        height: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        /// Let outline vertices labelled free or grouped move in z.
        #[arg(long)]
        variable_heights: bool,
        #[arg(long, value_enum)]
        metric: Option<Metric>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        no_facades: bool,
        #[arg(short = 'o', long)]
        out: PathBuf,
        /// Also write the solved roof as a roof graph file.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Check the 2D validity condition on every shared roof edge.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Resolve a probabilistic adjacency into realizable dual files.
    ResolveAdjacency {
        #[arg(long)]
        dual: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::Greedy)]
        strategy: Strategy,
        #[arg(long, default_value_t = 16)]
        max: usize,
        #[arg(long, default_value_t = adjacency::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Directory for candidate_<k>.json files.
        #[arg(short = 'o', long, default_value = ".")]
        out: PathBuf,
    },
    /// Apply a list of edits to a solved roof, re-optimizing locally.
    Edit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

/// A failure with its exit code and machine-readable name.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub name: String,
    pub message: String,
}

impl CliError {
    fn new(code: i32, name: &str, message: impl ToString) -> Self {
        CliError {
            code,
            name: name.to_string(),
            message: message.to_string(),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::NonPlanarInput { .. } => EXIT_EXPORT,
            _ => EXIT_INPUT,
        };
        let name = match e.invariant() {
            Some(inv) => format!("{}: {inv}", e.name()),
            None => e.name().to_string(),
        };
        CliError {
            code,
            name,
            message: e.to_string(),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::new(EXIT_SOLVE, e.name(), &e)
    }
}

impl From<EditError> for CliError {
    fn from(e: EditError) -> Self {
        CliError::new(EXIT_EDIT, e.name(), &e)
    }
}

impl From<AdjacencyError> for CliError {
    fn from(e: AdjacencyError) -> Self {
        CliError::new(EXIT_ADJACENCY, e.name(), &e)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::new(EXIT_OUTPUT, "IoError", format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_INPUT, "IoError", format!("{}: {e}", path.display())))
}

/// Parses `args` (program name first) and runs the command.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(
                err,
                "{}",
                json!({ "error": e.name, "message": e.message, "exit_code": e.code })
            );
            e.code
        }
    }
}

/// Entry point for the binary: logging from `ROOFFORGE_LOG`, real streams.
pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("ROOFFORGE_LOG", "warn"),
    )
    .try_init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn report(out: &mut dyn Write, r: &SolveResult) {
    let _ = writeln!(out, "err {:.3e}", r.planarity);
    let _ = writeln!(out, "iterations {}", r.iterations);
    let _ = writeln!(out, "converged {}", r.converged);
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Reconstruct {
            primal,
            dual,
            height,
            lambda,
            gamma,
            eta,
            variable_heights,
            metric,
            max_iters,
            no_facades,
            out: obj_path,
            json_out,
        } => {
            let d = SolveSpec::default();
            let mut spec = SolveSpec {
                h: height,
                lambda: lambda.unwrap_or(d.lambda),
                gamma: gamma.unwrap_or(d.gamma),
                eta: eta.unwrap_or(d.eta),
                planarity_kind: metric.map_or(d.planarity_kind, MetricKind::from),
                max_iters: max_iters.unwrap_or(d.max_iters),
                ..d
            };
            let result = if let Some(p) = dual {
                spec.mode = SolveMode::Dual;
                let dual = io::parse_dual(&read_file(&p)?)?.into_dual()?;
                solver::optimize_dual(&dual, &spec)
            } else {
                let p = primal.expect("clap requires one input");
                let doc = io::parse_roof(&read_file(&p)?)?;
                spec.mode = if variable_heights {
                    SolveMode::VariableHeight
                } else {
                    SolveMode::Primal
                };
                solver::optimize_graph(&doc.graph, &doc.xy, &spec)
            };
            let r = match result {
                Ok(r) => r,
                Err(SolveError::NotConverged(r)) => {
                    report(out, &r);
                    return Err(SolveError::NotConverged(r).into());
                }
                Err(e) => return Err(e.into()),
            };
            report(out, &r);
            if !r.converged {
                // keep the best iterate for inspection, but fail the command
                if let Some(j) = &json_out {
                    write_file(
                        j,
                        &io::roof_to_json(&RoofDocument::from_3d(r.graph.clone(), &r.embedding)),
                    )?;
                }
                return Err(SolveError::NotConverged(Box::new(r)).into());
            }
            let mesh = io::export_building(
                &r.graph,
                &r.embedding,
                ExportOptions {
                    facades: !no_facades,
                },
            )?;
            write_file(&obj_path, &mesh.to_obj())?;
            if let Some(j) = json_out {
                write_file(
                    &j,
                    &io::roof_to_json(&RoofDocument::from_3d(r.graph.clone(), &r.embedding)),
                )?;
            }
            Ok(0)
        }
        Command::Validate { graph, tol } => {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::new(
                    EXIT_USAGE,
                    "InvalidArgument",
                    "tol must be a finite non-negative number",
                ));
            }
            let doc = io::parse_roof(&read_file(&graph)?)?;
            let report =
                validity::check_validity_2d(&doc.graph, &doc.xy, tol).map_err(IoError::from)?;
            let _ = write!(
                out,
                "{}",
                io::to_json(&io::validity_report_json(&doc.graph, &report))
            );
            Ok(if report.is_valid() { 0 } else { EXIT_INVALID })
        }
        Command::ResolveAdjacency {
            dual,
            strategy,
            max,
            threshold,
            out: dir,
        } => {
            let (outline, prob) = match io::parse_dual(&read_file(&dual)?)? {
                DualDocument::Probabilistic { outline, prob, .. } => (outline, prob),
                DualDocument::Binary(d) => {
                    let n = d.n_outline();
                    let prob = (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|j| if d.is_adjacent(i, j) { 1.0 } else { 0.0 })
                                .collect()
                        })
                        .collect();
                    (d.outline().to_vec(), prob)
                }
            };
            let (cands, truncated) = match strategy {
                Strategy::Greedy => (
                    vec![adjacency::resolve_greedy(&outline, &prob, threshold)?],
                    false,
                ),
                Strategy::Sampling => {
                    let s = adjacency::resolve_sampling(&outline, &prob, threshold, max)?;
                    (s.candidates, s.truncated)
                }
            };
            std::fs::create_dir_all(&dir).map_err(|e| {
                CliError::new(EXIT_OUTPUT, "IoError", format!("{}: {e}", dir.display()))
            })?;
            let mut listing = Vec::new();
            for (k, c) in cands.iter().enumerate() {
                let path = dir.join(format!("candidate_{k}.json"));
                write_file(&path, &io::to_json(&io::candidate_to_file(&outline, c)))?;
                listing.push(json!({ "file": path.file_name().unwrap().to_string_lossy(), "score": c.score }));
            }
            let _ = write!(
                out,
                "{}",
                io::to_json(&json!({ "candidates": listing, "truncated": truncated }))
            );
            Ok(0)
        }
        Command::Edit {
            graph,
            ops,
            out: path,
        } => {
            let doc = io::parse_roof(&read_file(&graph)?)?;
            let Some(emb) = doc.embedding3() else {
                return Err(CliError::new(
                    EXIT_INPUT,
                    "SchemaError: z on all vertices or none",
                    "edit needs a roof with heights; use reconstruct --json-out first",
                ));
            };
            let ops = io::parse_edit_ops(&read_file(&ops)?)?;
            let mut session = EditSession::new(doc.graph, emb)?;
            let mut log = Vec::new();
            for op in &ops {
                let o = session.apply(op)?;
                log.push(json!({
                    "op": io::EditOpJson::from_op(op),
                    "region": o.region.map(|r| r.region.iter().map(|v| v + 1).collect::<Vec<_>>()),
                    "planarity": o.planarity,
                    "converged": o.converged,
                }));
            }
            let mut result = RoofDocument::from_3d(session.graph().clone(), session.embedding());
            result.image = doc.image;
            write_file(&path, &io::roof_to_json(&result))?;
            let _ = write!(out, "{}", io::to_json(&json!({ "edits": log })));
            Ok(0)
        }
        Command::Serve { port, host } => {
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()
                .map_err(|e| CliError::new(EXIT_OUTPUT, "IoError", e))?;
            rt.block_on(crate::service::serve(addr))
                .map_err(|e| CliError::new(EXIT_OUTPUT, "IoError", e))?;
            Ok(0)
        }
    }
}
