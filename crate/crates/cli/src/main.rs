//! `gbswitch`: solvers, constructions and certificates from the command line.
//!
//! Every command prints one document. JSON output is the result object with
//! timing and environment under a trailing `meta` key; everything outside
//! `meta` depends only on the arguments and the seed. Tensor results (such
//! as `vector construct`) are valid tensor documents and can be passed back
//! with `--in`.
//!
//! Exit codes: 0 success, 1 failure, 2 usage error, 3 capacity exceeded.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use gbswitch_core::bounds::{anisotropic_sign_bounds, sandwich_report, square_sign_bounds, theorem6b_bounds, BoundReport};
use gbswitch_core::classic::{
    best_imbalance_exact_with, worst_pattern_exact_with, worst_pattern_search, LightPattern, DEFAULT_BIT_BUDGET,
};
use gbswitch_core::constructions::extremal_tensor;
use gbswitch_core::format::{parse_tensor, tensor_to_json};
use gbswitch_core::tensor::DenseTensor;
use gbswitch_core::torus::{
    alternating_ascent, phase_grid_lower_bound, rademacher_average_exact, steinhaus_inequality_check, AscentConfig,
};
use gbswitch_core::{Coefficients, Error, Shape, Tensor, DEFAULT_SEED};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "gbswitch", version, about = "Switching-game solvers, torus norms and bound certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// The ±1 light game.
    #[command(subcommand)]
    Classic(ClassicCmd),
    /// Unimodular (vector) game: norms, grids, constructions.
    #[command(subcommand)]
    Vector(VectorCmd),
    /// Random-sign and random-phase averages.
    #[command(subcommand)]
    Avg(AvgCmd),
    /// Closed-form bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Run the HTTP game service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Subcommand)]
enum ClassicCmd {
    /// Best switch setting for a light pattern.
    Solve {
        /// Sign tensor document with two axes.
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest number of enumerated switches.
        #[arg(long, default_value_t = DEFAULT_BIT_BUDGET)]
        budget: u32,
    },
    /// Exact worst pattern: the minimum over patterns of the best imbalance.
    Worst {
        #[arg(long)]
        shape: Shape,
        /// Largest number of enumerated free pattern entries.
        #[arg(long, default_value_t = DEFAULT_BIT_BUDGET)]
        budget: u32,
    },
    /// Local search for bad patterns on boards too large to enumerate.
    Search {
        #[arg(long)]
        shape: Shape,
        /// Number of patterns evaluated.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum VectorCmd {
    /// Torus norm estimate by alternating phase ascent.
    Norm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: u32,
    },
    /// Exhaustive phase-grid lower bound.
    Grid {
        #[arg(long = "in")]
        input: PathBuf,
        /// Grid points per circle.
        #[arg(long, default_value_t = 8)]
        grid: u32,
    },
    /// The chained Fourier tensor of a shape.
    Construct {
        #[arg(long)]
        shape: Shape,
    },
    /// Lower certificate, ascent estimate and upper bound side by side.
    #[command(group(ArgGroup::new("source").required(true).args(["shape", "input"])))]
    Certify {
        /// Certify the construction for this shape.
        #[arg(long)]
        shape: Option<Shape>,
        /// Certify an arbitrary tensor document (upper bound not checked).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        restarts: u32,
    },
}

#[derive(Subcommand)]
enum AvgCmd {
    /// Monte Carlo average over random phases, with the Steinhaus check.
    Steinhaus {
        /// Tensor document, or a JSON array of reals or `[re, im]` pairs.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Randomized axes, 1-based (default: all).
        #[arg(long, value_delimiter = ',')]
        axes: Option<Vec<usize>>,
        /// Exponent of `2/√π` (default: number of randomized axes).
        #[arg(long)]
        exponent: Option<u32>,
    },
    /// Exact average over random signs.
    Rademacher {
        /// JSON array of reals.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Unimodular game sandwich.
    T6b {
        #[arg(long)]
        shape: Shape,
    },
    /// Anisotropic sign game, sum and max normalizers.
    T3a {
        #[arg(long)]
        shape: Shape,
    },
    /// Square sign game; `--shape n` or `--shape n,n`.
    Square {
        #[arg(long)]
        shape: Shape,
    },
}

/// A command result: the document and, for CSV, its table rows.
struct Output {
    doc: Value,
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
}

impl From<Value> for Output {
    fn from(doc: Value) -> Self {
        Self { doc, table: None }
    }
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Run<T> = Result<T, Failure>;

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_tensor(path: &Path) -> Run<Tensor> {
    Ok(parse_tensor(&read(path)?)?)
}

fn parse_json(path: &Path) -> Run<Value> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn tensor_value(t: &Tensor) -> Value {
    serde_json::from_str(&tensor_to_json(t)).expect("tensor documents are JSON")
}

fn bound_table(reports: &[&BoundReport]) -> (Vec<String>, Vec<Vec<String>>) {
    (
        BoundReport::CSV_HEADER.iter().map(|s| s.to_string()).collect(),
        reports.iter().map(|r| r.csv_record().to_vec()).collect(),
    )
}

/// Dense coefficients from a tensor document or a bare JSON array.
fn read_coefficients(path: &Path) -> Run<DenseTensor> {
    let value = parse_json(path)?;
    let Value::Array(items) = value else {
        let t: Tensor = serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        return Ok(DenseTensor::new(t.shape().clone(), t.to_complex())?);
    };
    let bad = || Error::Parse("expected an array of reals or [re, im] pairs".into());
    let values = items
        .iter()
        .map(|v| match v {
            Value::Number(n) => n.as_f64().map(|re| Complex64::new(re, 0.0)).ok_or_else(bad),
            Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DenseTensor::vector(values)?)
}

fn read_reals(path: &Path) -> Run<Vec<f64>> {
    serde_json::from_value(parse_json(path)?)
        .map_err(|e| Error::Parse(format!("{}: expected an array of reals: {e}", path.display())).into())
}

fn classic(cmd: ClassicCmd, seed: u64) -> Run<Output> {
    Ok(match cmd {
        ClassicCmd::Solve { input, budget } => {
            let Tensor::Sign(t) = read_tensor(&input)? else {
                return Err(Error::ModeMismatch("classic solve needs a sign tensor".into()).into());
            };
            let result = best_imbalance_exact_with(&LightPattern::new(t), budget)?;
            to_value(&result).into()
        }
        ClassicCmd::Worst { shape, budget } => {
            let (value, witness) = worst_pattern_exact_with(&shape, budget)?;
            json!({"shape": shape, "value": value, "witness": tensor_value(&witness.into())}).into()
        }
        ClassicCmd::Search { shape, budget } => {
            let (value, witness) = worst_pattern_search(&shape, budget, seed)?;
            json!({
                "shape": shape,
                "value": value,
                "budget": budget,
                "seed": seed,
                "witness": tensor_value(&witness.into()),
            })
            .into()
        }
    })
}

fn vector(cmd: VectorCmd, seed: u64) -> Run<Output> {
    Ok(match cmd {
        VectorCmd::Norm { input, restarts } => {
            let t = read_tensor(&input)?;
            let cfg = AscentConfig { restarts, seed, ..AscentConfig::default() };
            to_value(&alternating_ascent(&t, &cfg)?).into()
        }
        VectorCmd::Grid { input, grid } => {
            let t = read_tensor(&input)?;
            let mut doc = to_value(&phase_grid_lower_bound(&t, grid)?);
            doc["grid"] = json!(grid);
            doc.into()
        }
        VectorCmd::Construct { shape } => tensor_value(&extremal_tensor(&shape)?.into()).into(),
        VectorCmd::Certify { shape, input, restarts } => {
            let cfg = AscentConfig { restarts, seed, ..AscentConfig::default() };
            let (tensor, construction) = match (shape, input) {
                (Some(shape), _) => (Tensor::from(extremal_tensor(&shape)?), true),
                (None, Some(path)) => (read_tensor(&path)?, false),
                (None, None) => unreachable!("clap requires one source"),
            };
            let estimate = alternating_ascent(&tensor, &cfg)?;
            to_value(&sandwich_report(tensor.shape(), &estimate, construction)?).into()
        }
    })
}

fn avg(cmd: AvgCmd, seed: u64) -> Run<Output> {
    Ok(match cmd {
        AvgCmd::Steinhaus { input, samples, axes, exponent } => {
            let coeffs = read_coefficients(&input)?;
            let m = coeffs.shape().order();
            let axes = match axes {
                Some(axes) => {
                    if let Some(&bad) = axes.iter().find(|&&a| a == 0 || a > m) {
                        return Err(Error::Dimension(format!("axis {bad} out of range 1..={m}")).into());
                    }
                    axes.iter().map(|a| a - 1).collect()
                }
                None => (0..m).collect::<Vec<_>>(),
            };
            let exponent = exponent.unwrap_or(axes.len() as u32);
            let check = steinhaus_inequality_check(&coeffs, &axes, exponent, samples, seed)?;
            let mut doc = to_value(&check);
            doc["random_axes"] = json!(axes.iter().map(|a| a + 1).collect::<Vec<_>>());
            doc.into()
        }
        AvgCmd::Rademacher { input } => {
            let a = read_reals(&input)?;
            let value = rademacher_average_exact(&a)?;
            let l2 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            json!({"n": a.len(), "value": value, "l2": l2, "holds": value <= l2}).into()
        }
    })
}

fn bounds(cmd: BoundsCmd) -> Run<Output> {
    Ok(match cmd {
        BoundsCmd::T6b { shape } => {
            let r = theorem6b_bounds(&shape);
            Output { doc: to_value(&r), table: Some(bound_table(&[&r])) }
        }
        BoundsCmd::T3a { shape } => {
            let (sum_form, max_form) = anisotropic_sign_bounds(&shape)?;
            Output {
                doc: json!({"sum_normalizer": sum_form, "max_normalizer": max_form}),
                table: Some(bound_table(&[&sum_form, &max_form])),
            }
        }
        BoundsCmd::Square { shape } => {
            let n = match *shape.dims() {
                [n] => n,
                [a, b] if a == b => a,
                _ => return Err(Error::Dimension(format!("square bounds need n or n,n, got {shape}")).into()),
            };
            let b = square_sign_bounds(n)?;
            let table = bound_table(&b.reports.iter().collect::<Vec<_>>());
            Output { doc: to_value(&b), table: Some(table) }
        }
    })
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(out: &Output, format: Format, meta: Value) -> Run<String> {
    match format {
        Format::Json => {
            let mut doc = out.doc.clone();
            if let Value::Object(map) = &mut doc {
                map.insert("meta".into(), meta);
            }
            Ok(serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n")
        }
        Format::Csv => {
            let (header, rows) = match &out.table {
                Some(t) => t.clone(),
                None => {
                    // one row of the scalar top-level fields
                    let empty = Map::new();
                    let map = out.doc.as_object().unwrap_or(&empty);
                    let cols: Vec<_> = map.iter().filter(|(_, v)| !v.is_object() && !v.is_array()).collect();
                    (
                        cols.iter().map(|(k, _)| k.to_string()).collect(),
                        vec![cols.iter().map(|(_, v)| scalar_text(v)).collect()],
                    )
                }
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).and_then(|_| rows.iter().try_for_each(|r| w.write_record(r))).map_err(|e| Failure::Io(e.to_string()))?;
            let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
        Format::Text => {
            let mut s = String::new();
            if let Value::Object(map) = &out.doc {
                for (k, v) in map {
                    s.push_str(&format!("{k}: {}\n", scalar_text(v)));
                }
            } else {
                s.push_str(&scalar_text(&out.doc));
                s.push('\n');
            }
            Ok(s)
        }
    }
}

fn run(cli: Cli) -> Run<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    let started = Instant::now();
    let (name, out) = match cli.command {
        Command::Classic(cmd) => ("classic", classic(cmd, cli.seed)?),
        Command::Vector(cmd) => ("vector", vector(cmd, cli.seed)?),
        Command::Avg(cmd) => ("avg", avg(cmd, cli.seed)?),
        Command::Bounds(cmd) => ("bounds", bounds(cmd)?),
        Command::Serve { addr } => {
            eprintln!("serving on http://{addr}/api/v1");
            return gbswitch_service::serve_blocking(addr).map_err(|e| Failure::Io(e.to_string()));
        }
    };
    let meta = json!({
        "command": name,
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
        "threads": rayon::current_num_threads(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let text = render(&out, cli.format, meta)?;
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e @ Error::Capacity(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
