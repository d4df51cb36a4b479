//! Command-line front end: stable file formats in, CSV or JSON out.
//!
//! Exit codes: 0 success (and Isospectral), 1 NotIsospectral, 2 Unsupported,
//! 64 usage error, 65 domain error (JSON error object on stdout).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use serde_json::{json, Value};

use qgraph::expansion::{expand, SecularFunction};
use qgraph::iso::{
    balancing_residual, check_isospectral, check_isospectral_relaxed, find_isospectral_numeric,
    sigma_necessary, uniqueness_report, SearchConfig, Verdict,
};
use qgraph::mfunc::sigma_set;
use qgraph::reduction::{
    clean_vertex, quasi_remove_mixed_edge, thm00_reduce, trim_loop_vertex, trim_same_type_edge,
    QuasiVertexKind, ReductionResult,
};
use qgraph::spectrum::{
    eigenvalues_edge_basis, eigenvalues_secular, flag_loop_invisible, RootFlag, ScanOptions,
    SpectrumWindow,
};
use qgraph::{CouplingVector, MarkedGraph};

const EXIT_NOT_ISOSPECTRAL: u8 = 1;
const EXIT_UNSUPPORTED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DOMAIN: u8 = 65;

#[derive(Parser)]
#[command(
    name = "qgraph",
    version,
    about = "Secular calculus and isospectrality tests for marked metric graphs"
)]
struct Cli {
    /// Cap the worker thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Secular,
    EdgeBasis,
    /// Both solvers; edge-basis roots missing from the secular list are
    /// flagged loop-invisible.
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    /// Eliminate the delta' endpoint into the delta one.
    DeltaPrimeToDelta,
    /// Eliminate the delta endpoint into the delta' one.
    DeltaToDeltaPrime,
}

#[derive(Args)]
struct WindowArgs {
    /// Lower end of the lambda window; defaults to a heuristic negative
    /// bound −(2·max(1, |α|_max))².
    #[arg(long)]
    lmin: Option<f64>,
    /// Upper end of the lambda window.
    #[arg(long, default_value_t = 100.0)]
    lmax: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Numeric eigenvalues in a window (CSV: lambda,multiplicity,flag).
    Spectrum {
        graph: PathBuf,
        coupling: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, value_enum, default_value = "secular")]
        method: MethodArg,
        /// Scan step in mu for lambda > 0 (default pi/(40·total length)).
        #[arg(long)]
        mu_step: Option<f64>,
        /// Scan step for the negative part (default window/2000).
        #[arg(long)]
        negative_step: Option<f64>,
        #[arg(long, default_value_t = 1e-7)]
        cluster_radius: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Secular function values on a uniform lambda grid (CSV: lambda,value).
    Secular {
        graph: PathBuf,
        coupling: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Exact weight-class table of det(M−B) (JSON).
    Expand { graph: PathBuf },
    /// Exact isospectrality test for two coupling vectors.
    CheckIso {
        graph: PathBuf,
        coupling1: PathBuf,
        coupling2: PathBuf,
        /// Use the relaxed criterion (requires Phi-equality).
        #[arg(long)]
        relaxed: bool,
    },
    /// Sigma-set invariant of one or two coupling vectors.
    Sigma {
        graph: PathBuf,
        coupling1: PathBuf,
        coupling2: Option<PathBuf>,
    },
    /// Balancing-condition sides at each applicable vertex.
    Balance {
        graph: PathBuf,
        coupling1: PathBuf,
        coupling2: PathBuf,
        /// Restrict to one vertex.
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Admissible trimming: remove a same-type edge or a loop vertex.
    Trim {
        graph: PathBuf,
        /// Same-type edge to remove (type i).
        #[arg(long, conflicts_with = "loop_vertex")]
        edge: Option<String>,
        /// Loop-carrying vertex to remove (type ii).
        #[arg(long)]
        loop_vertex: Option<String>,
        /// Coupling files to transport through the reduction.
        couplings: Vec<PathBuf>,
        /// Also write the reduced graph file here.
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
    /// Cleaning: drop a valence-2 vertex whose couplings are both zero.
    Clean {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        coupling1: PathBuf,
        coupling2: PathBuf,
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
    /// Remove one mixed edge, producing the quasigraph (JSON description).
    QuasiRemove {
        graph: PathBuf,
        #[arg(long)]
        edge: String,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// With two coupling files and a doubly-zero designated endpoint,
        /// regularize the quasivertex into an ordinary graph instead.
        couplings: Vec<PathBuf>,
    },
    /// Structural uniqueness report (JSON).
    Report { graph: PathBuf },
    /// Exploratory numeric search for isospectral coupling vectors.
    SearchIso {
        graph: PathBuf,
        coupling: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        random_starts: usize,
        #[arg(long, default_value_t = 1e-10)]
        residual_tol: f64,
    },
}

enum Failure {
    Usage(String),
    Domain(qgraph::Error),
    Io(String),
}

impl From<qgraph::Error> for Failure {
    fn from(e: qgraph::Error) -> Self {
        Failure::Domain(e)
    }
}

type CmdResult = Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("--threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok((payload, code)) => {
            print!("{payload}");
            ExitCode::from(code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Domain(e)) => {
            let obj = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            println!("{obj:#}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::Io(msg)) => {
            let obj = json!({"error": {"kind": "io", "message": msg}});
            println!("{obj:#}");
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<MarkedGraph, Failure> {
    Ok(MarkedGraph::parse(&read_file(path)?)?)
}

fn load_coupling(path: &Path, g: &MarkedGraph) -> Result<CouplingVector, Failure> {
    Ok(CouplingVector::parse(&read_file(path)?, g)?)
}

fn default_lmin(alpha: &CouplingVector) -> f64 {
    let worst = alpha
        .to_f64s()
        .iter()
        .fold(1.0f64, |acc, a| acc.max(a.abs()));
    -(2.0 * worst).powi(2)
}

fn check_window(lmin: f64, lmax: f64) -> Result<(), Failure> {
    if !(lmax > lmin) {
        return Err(Failure::Usage(format!(
            "empty window: lmin = {lmin}, lmax = {lmax}"
        )));
    }
    Ok(())
}

fn require_positive(name: &str, value: f64) -> Result<(), Failure> {
    if !(value > 0.0) {
        return Err(Failure::Usage(format!("--{name} must be positive")));
    }
    Ok(())
}

fn flags_string(flags: &[RootFlag]) -> String {
    flags
        .iter()
        .map(|f| match f {
            RootFlag::LoopInvisible => "loop-invisible",
            RootFlag::ZeroMode => "zero-mode",
            RootFlag::Cluster => "cluster",
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn spectrum_json(w: &SpectrumWindow) -> Value {
    let roots: Vec<Value> = w
        .roots
        .iter()
        .map(|r| {
            json!({
                "lambda": r.lambda,
                "multiplicity": r.multiplicity,
                "flags": r.flags.iter().map(|f| flags_string(&[*f])).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "method": match w.method {
            qgraph::spectrum::SpectrumMethod::Secular => "secular",
            qgraph::spectrum::SpectrumMethod::EdgeBasis => "edge-basis",
        },
        "lambda_min": w.lambda_min,
        "lambda_max": w.lambda_max,
        "roots": roots,
    })
}

fn spectrum_csv(w: &SpectrumWindow) -> String {
    let mut out = String::from("lambda,multiplicity,flag\n");
    for r in &w.roots {
        out.push_str(&format!(
            "{:.12e},{},{}\n",
            r.lambda,
            r.multiplicity,
            flags_string(&r.flags)
        ));
    }
    out
}

fn reduction_json(
    r: &ReductionResult,
    g: &MarkedGraph,
    couplings: &[CouplingVector],
) -> Result<Value, Failure> {
    let mut obj = r.coupling_map_json();
    obj["graph"] = Value::String(r.graph.to_text());
    let mut reduced = Vec::new();
    for c in couplings {
        let rc = r.apply(g, c)?;
        reduced.push(Value::String(rc.to_text(&r.graph)));
    }
    obj["couplings"] = Value::Array(reduced);
    Ok(obj)
}

fn write_graph_out(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    if let Some(path) = path {
        std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Spectrum {
            graph,
            coupling,
            window,
            method,
            mu_step,
            negative_step,
            cluster_radius,
            format,
        } => {
            let g = load_graph(&graph)?;
            let alpha = load_coupling(&coupling, &g)?;
            let lmin = window.lmin.unwrap_or_else(|| default_lmin(&alpha));
            check_window(lmin, window.lmax)?;
            if let Some(s) = mu_step {
                require_positive("mu-step", s)?;
            }
            if let Some(s) = negative_step {
                require_positive("negative-step", s)?;
            }
            require_positive("cluster-radius", cluster_radius)?;
            let opts = ScanOptions {
                mu_step,
                negative_step,
                cluster_radius,
            };
            let w = match method {
                MethodArg::Secular => {
                    eigenvalues_secular(&g, &alpha, lmin, window.lmax, &opts)?
                }
                MethodArg::EdgeBasis => {
                    eigenvalues_edge_basis(&g, &alpha, lmin, window.lmax, &opts)?
                }
                MethodArg::Both => {
                    let sec = eigenvalues_secular(&g, &alpha, lmin, window.lmax, &opts)?;
                    let edge = eigenvalues_edge_basis(&g, &alpha, lmin, window.lmax, &opts)?;
                    flag_loop_invisible(&sec, &edge, 1e-7)?
                }
            };
            let payload = match format {
                FormatArg::Csv => spectrum_csv(&w),
                FormatArg::Json => format!("{:#}\n", spectrum_json(&w)),
            };
            Ok((payload, 0))
        }
        Command::Secular {
            graph,
            coupling,
            window,
            points,
        } => {
            let g = load_graph(&graph)?;
            let alpha = load_coupling(&coupling, &g)?;
            let lmin = window.lmin.unwrap_or_else(|| default_lmin(&alpha));
            check_window(lmin, window.lmax)?;
            if points == 0 {
                return Err(Failure::Usage("--points must be positive".into()));
            }
            let f = SecularFunction::build(&g)?;
            let alpha_f = alpha.to_f64s();
            let mut out = String::from("lambda,value\n");
            for i in 0..=points {
                let lambda = lmin + (window.lmax - lmin) * (i as f64) / (points as f64);
                let value = f.value(&alpha_f, lambda)?;
                out.push_str(&format!("{lambda:.12e},{value:.12e}\n"));
            }
            Ok((out, 0))
        }
        Command::Expand { graph } => {
            let g = load_graph(&graph)?;
            let expansion = expand(&g)?;
            Ok((format!("{:#}\n", expansion.to_json()), 0))
        }
        Command::CheckIso {
            graph,
            coupling1,
            coupling2,
            relaxed,
        } => {
            let g = load_graph(&graph)?;
            let a = load_coupling(&coupling1, &g)?;
            let b = load_coupling(&coupling2, &g)?;
            let verdict = if relaxed {
                check_isospectral_relaxed(&g, &a, &b)?
            } else {
                check_isospectral(&g, &a, &b)?
            };
            let code = match verdict.verdict {
                Verdict::Isospectral => 0,
                Verdict::NotIsospectral => EXIT_NOT_ISOSPECTRAL,
                Verdict::Unsupported => EXIT_UNSUPPORTED,
            };
            Ok((format!("{:#}\n", verdict.to_json()), code))
        }
        Command::Sigma {
            graph,
            coupling1,
            coupling2,
        } => {
            let g = load_graph(&graph)?;
            let a = load_coupling(&coupling1, &g)?;
            let (va, _) = a.rationalized(1_000_000);
            let sa = sigma_set(&g, &va);
            let mut obj = json!({
                "sigma": sa.values().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            });
            if let Some(path) = coupling2 {
                let b = load_coupling(&path, &g)?;
                let (vb, _) = b.rationalized(1_000_000);
                let sb = sigma_set(&g, &vb);
                obj["sigma2"] = Value::Array(
                    sb.values()
                        .iter()
                        .map(|r| Value::String(r.to_string()))
                        .collect(),
                );
                obj["equal"] = Value::Bool(sigma_necessary(&g, &a, &b));
            }
            Ok((format!("{obj:#}\n"), 0))
        }
        Command::Balance {
            graph,
            coupling1,
            coupling2,
            vertex,
        } => {
            let g = load_graph(&graph)?;
            let a = load_coupling(&coupling1, &g)?;
            let b = load_coupling(&coupling2, &g)?;
            let targets: Vec<String> = match vertex {
                Some(v) => vec![v],
                None => g.vertices().iter().map(|v| v.id.clone()).collect(),
            };
            let mut rows = Vec::new();
            let mut skipped = Vec::new();
            for v in targets {
                match balancing_residual(&g, &v, &a, &b) {
                    Ok((lhs, rhs)) => rows.push(json!({
                        "vertex": v,
                        "lhs": lhs.to_string(),
                        "rhs": rhs.to_string(),
                        "equal": lhs == rhs,
                    })),
                    Err(e @ qgraph::Error::ZeroAdjacentCoupling(_)) => {
                        skipped.push(json!({"vertex": v, "reason": e.to_string()}));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let obj = json!({"vertices": rows, "skipped": skipped});
            Ok((format!("{obj:#}\n"), 0))
        }
        Command::Trim {
            graph,
            edge,
            loop_vertex,
            couplings,
            graph_out,
        } => {
            let g = load_graph(&graph)?;
            let r = match (edge, loop_vertex) {
                (Some(e), None) => trim_same_type_edge(&g, &e)?,
                (None, Some(v)) => trim_loop_vertex(&g, &v)?,
                _ => {
                    return Err(Failure::Usage(
                        "trim needs exactly one of --edge or --loop-vertex".into(),
                    ))
                }
            };
            if couplings.len() > 2 {
                return Err(Failure::Usage("at most two coupling files".into()));
            }
            let cvs = couplings
                .iter()
                .map(|p| load_coupling(p, &g))
                .collect::<Result<Vec<_>, _>>()?;
            let obj = reduction_json(&r, &g, &cvs)?;
            write_graph_out(&graph_out, &r.graph.to_text())?;
            Ok((format!("{obj:#}\n"), 0))
        }
        Command::Clean {
            graph,
            vertex,
            coupling1,
            coupling2,
            graph_out,
        } => {
            let g = load_graph(&graph)?;
            let a = load_coupling(&coupling1, &g)?;
            let b = load_coupling(&coupling2, &g)?;
            let v = g.vertex_index(&vertex)?;
            // the operation itself is coupling-agnostic; the wrapper insists
            // on the 00 condition that makes cleaning spectrally sound
            if !a.get(v).is_zero() || !b.get(v).is_zero() {
                return Err(qgraph::Error::EndpointNotDoublyZero(vertex).into());
            }
            let r = clean_vertex(&g, &vertex)?;
            let obj = reduction_json(&r, &g, &[a, b])?;
            write_graph_out(&graph_out, &r.graph.to_text())?;
            Ok((format!("{obj:#}\n"), 0))
        }
        Command::QuasiRemove {
            graph,
            edge,
            direction,
            couplings,
        } => {
            let g = load_graph(&graph)?;
            match couplings.len() {
                0 => {
                    let kind = match direction {
                        DirectionArg::DeltaPrimeToDelta => QuasiVertexKind::DeltaPrimeToDelta,
                        DirectionArg::DeltaToDeltaPrime => QuasiVertexKind::DeltaToDeltaPrime,
                    };
                    let q = quasi_remove_mixed_edge(&g, &edge, kind)?;
                    Ok((format!("{:#}\n", q.to_json()), 0))
                }
                2 => {
                    let a = load_coupling(&couplings[0], &g)?;
                    let b = load_coupling(&couplings[1], &g)?;
                    let (r, ra, rb) = thm00_reduce(&g, &edge, &a, &b)?;
                    let obj = reduction_json(&r, &g, &[])?;
                    let mut obj = obj;
                    obj["couplings"] = Value::Array(vec![
                        Value::String(ra.to_text(&r.graph)),
                        Value::String(rb.to_text(&r.graph)),
                    ]);
                    Ok((format!("{obj:#}\n"), 0))
                }
                _ => Err(Failure::Usage(
                    "quasi-remove takes zero or two coupling files".into(),
                )),
            }
        }
        Command::Report { graph } => {
            let g = load_graph(&graph)?;
            Ok((format!("{:#}\n", uniqueness_report(&g).to_json()), 0))
        }
        Command::SearchIso {
            graph,
            coupling,
            seed,
            random_starts,
            residual_tol,
        } => {
            let g = load_graph(&graph)?;
            let alpha = load_coupling(&coupling, &g)?;
            require_positive("residual-tol", residual_tol)?;
            let cfg = SearchConfig {
                seed,
                random_starts,
                residual_tol,
                ..SearchConfig::default()
            };
            let found = find_isospectral_numeric(&g, &alpha, &cfg)?;
            let candidates: Vec<Value> = found
                .iter()
                .map(|cv| {
                    let (vals, _) = cv.rationalized(1_000_000);
                    Value::Array(
                        vals.iter()
                            .map(|r: &BigRational| Value::String(r.to_string()))
                            .collect(),
                    )
                })
                .collect();
            let obj = json!({
                "seed": seed,
                "candidates": candidates,
                "note": "exploratory search; candidates re-verified exactly, not exhaustive",
            });
            Ok((format!("{obj:#}\n"), 0))
        }
    }
}
