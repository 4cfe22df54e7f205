//! Command-line front end: `monitor`, `simulate` and `check`.
//!
//! Exit codes: 0 success, 1 violation under `--assert-all`, 2 usage, IO or
//! parse errors, 3 malformed trace or space files, 4 semantic errors (the
//! formula does not fit the trace or the space).

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use strel::io::{self, IoError, Selection, VerdictValue};
use strel::logic::ParseError;
use strel::scenarios::{manet_generate, GraphKind, ManetConfig};
use strel::{
    monitor, parse, validate, BooleanDomain, Formula, InterpretationContext, MaxMinDomain,
    MonitorOptions, MonitorResult, SignalDomain,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_SEMANTIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "strel", version, about = "Spatio-temporal monitoring over location graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Semantics {
    Boolean,
    Maxmin,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Graph {
    Radius,
    Delaunay,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monitor a formula over a trace and a location service.
    Monitor {
        /// Formula file, or the formula text itself when no such file exists.
        #[arg(long)]
        formula: String,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_enum, default_value = "boolean")]
        semantics: Semantics,
        /// Output file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Defaults to json for a `.json` output and csv otherwise.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Export only these locations (repeatable).
        #[arg(long = "location")]
        locations: Vec<usize>,
        /// Export only the value at this time.
        #[arg(long)]
        at: Option<f64>,
        /// Exit with 1 when the formula fails at time 0 at some location.
        #[arg(long)]
        assert_all: bool,
        /// Worker threads, 0 for sequential; overrides STREL_THREADS.
        #[arg(long)]
        threads: Option<usize>,
        /// Print timing and fixpoint statistics on standard error.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Generate a random-walk MANET trace and space.
    Simulate {
        #[arg(long, default_value_t = 100)]
        nodes: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 10.0)]
        arena: f64,
        #[arg(long, default_value_t = 0.3)]
        walk_sigma: f64,
        #[arg(long, default_value_t = 0.3)]
        router_fraction: f64,
        #[arg(long, value_enum, default_value = "radius")]
        graph: Graph,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Receives trace.json and space.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Parse a formula and print it; validate it against a trace when given.
    Check {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Io { .. } => EXIT_USAGE,
            IoError::Schema { .. } => EXIT_SCHEMA,
        };
        Failure::new(code, e)
    }
}

fn read_formula(source: &str) -> Result<Formula, Failure> {
    let path = Path::new(source);
    let (text, origin) = if path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
        (text, path.display().to_string())
    } else {
        (source.to_string(), "<formula>".to_string())
    };
    parse(&text).map_err(|e: ParseError| Failure::new(EXIT_USAGE, format!("{origin}:{e}")))
}

struct Export {
    selection: Selection,
    format: Format,
}

fn run_monitor<D: SignalDomain>(
    service: &strel::LocationService,
    trace: &strel::Trace,
    formula: &Formula,
    options: &MonitorOptions,
    export: &Export,
    violated: impl Fn(&D::Value) -> bool,
) -> Result<(String, MonitorResult<D::Value>, bool), Failure>
where
    D::Value: VerdictValue,
{
    let ctx = InterpretationContext::default();
    let result = monitor::<D>(service, trace, formula, &ctx, options).map_err(|e| {
        let code = match e {
            strel::MonitorError::ThreadPool(_) => EXIT_USAGE,
            _ => EXIT_SEMANTIC,
        };
        Failure::new(code, e)
    })?;
    let text = match export.format {
        Format::Csv => io::verdicts_to_csv_selected(&result.signal, &export.selection),
        Format::Json => io::result_to_json_selected(&result, &export.selection),
    };
    let any_violation = result
        .signal
        .signals()
        .iter()
        .any(|s| violated(&s.values()[0]));
    Ok((text, result, any_violation))
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Monitor {
            formula,
            trace,
            space,
            semantics,
            output,
            format,
            locations,
            at,
            assert_all,
            threads,
            verbose,
        } => {
            let formula = read_formula(&formula)?;
            let trace = io::load_trace(&trace)?;
            let service = io::load_space(&space)?;
            let options = match threads {
                Some(n) => MonitorOptions { threads: Some(n) },
                None => MonitorOptions::from_env(),
            };
            let format = format.unwrap_or(match &output {
                Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
                _ => Format::Csv,
            });
            let export = Export {
                selection: Selection {
                    locations: (!locations.is_empty()).then_some(locations),
                    at,
                },
                format,
            };
            let (text, elapsed, stats, violated) = match semantics {
                Semantics::Boolean => {
                    let (t, r, v) = run_monitor::<BooleanDomain>(
                        &service, &trace, &formula, &options, &export, |b| !*b,
                    )?;
                    (t, r.elapsed, r.stats, v)
                }
                Semantics::Maxmin => {
                    let (t, r, v) = run_monitor::<MaxMinDomain>(
                        &service, &trace, &formula, &options, &export, |x| *x < 0.0,
                    )?;
                    (t, r.elapsed, r.stats, v)
                }
            };
            match output {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?,
                None => out
                    .write_all(text.as_bytes())
                    .map_err(|e| Failure::new(EXIT_USAGE, e))?,
            }
            if verbose {
                let _ = writeln!(
                    err,
                    "monitored {} locations in {:.3} ms; {} spatial evaluations, at most {} fixpoint rounds",
                    stats.universe,
                    elapsed.as_secs_f64() * 1e3,
                    stats.spatial_evaluations,
                    stats.max_fixpoint_iterations
                );
            }
            if assert_all && violated {
                let _ = writeln!(err, "violation: the formula fails at time 0 at some location");
                return Ok(EXIT_VIOLATION);
            }
            Ok(EXIT_OK)
        }
        Command::Simulate {
            nodes,
            steps,
            dt,
            radius,
            arena,
            walk_sigma,
            router_fraction,
            graph,
            seed,
            out_dir,
        } => {
            let config = ManetConfig {
                nodes,
                steps,
                dt,
                arena,
                walk_sigma,
                radius,
                graph: match graph {
                    Graph::Radius => GraphKind::Radius,
                    Graph::Delaunay => GraphKind::Delaunay,
                },
                router_fraction,
                seed,
            };
            let (service, trace) = manet_generate(&config).map_err(|e| Failure::new(EXIT_USAGE, e))?;
            fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", out_dir.display())))?;
            io::save_trace(&trace, out_dir.join("trace.json"))?;
            io::save_space(&service, out_dir.join("space.json"))?;
            Ok(EXIT_OK)
        }
        Command::Check { formula, trace } => {
            let formula = read_formula(&formula)?;
            if let Some(path) = trace {
                let trace = io::load_trace(&path)?;
                validate(
                    &formula,
                    &InterpretationContext::default(),
                    trace.schema(),
                    trace.universe(),
                )
                .map_err(|e| Failure::new(EXIT_SEMANTIC, e))?;
            }
            writeln!(out, "{formula}").map_err(|e| Failure::new(EXIT_USAGE, e))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code. Results go to `out` unless written to a file; diagnostics go to
/// `err`.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
