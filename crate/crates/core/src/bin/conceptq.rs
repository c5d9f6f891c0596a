use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conceptq::dataset::{
    emit_curve, parse_dataset, run_pipeline, write_curve, write_dataset, Dataset, DatasetError, PipelineOptions,
    Report, Stage, FIXTURE_CSV, FIXTURE_NAME,
};
use conceptq::interference_fit::{fit, DEFAULT_GRID_STEPS, MIN_GRID_STEPS};
use conceptq::scop::synthesize_triple;

const EXIT_INPUT: u8 = 1;
const EXIT_INVARIANT: u8 = 2;

/// Classicality audits and quantum interference fits for concept-combination
/// membership data.
#[derive(Parser)]
#[command(name = "conceptq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify each triple against the classical representability bounds.
    Audit(DataArgs),
    /// Audit, then fit the interference model to each triple.
    Fit(DataArgs),
    /// Fit, then build the C^3 model for each feasible triple.
    Realize(DataArgs),
    /// Realize, then check every model against its data.
    Verify(DataArgs),
    /// Tabulate the predicted combined weight over the interference angle.
    Curve(CurveArgs),
    /// Resample each row's weights from its item entity.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// Input CSV; the bundled four-item fixture when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Only process rows with this item label.
    #[arg(long)]
    item: Option<String>,
}

#[derive(Args)]
struct DataArgs {
    #[command(flatten)]
    common: Common,
    /// Tolerance on reproduced membership weights.
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    grid_steps: usize,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    mu_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu_b: Option<f64>,
    /// Context overlap `n`; taken from a fit of the selected item when omitted.
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, default_value_t = 181)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    grid_steps: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    /// Simulated participants per concept.
    #[arg(long, default_value_t = 1000)]
    draws: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load(common: &Common) -> Result<Dataset, Failure> {
    let dataset = match &common.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            parse_dataset(&text, &path.display().to_string())?
        }
        None => parse_dataset(FIXTURE_CSV, FIXTURE_NAME)?,
    };
    Ok(match &common.item {
        Some(item) => dataset.filter_item(item),
        None => dataset,
    })
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_stage(args: &DataArgs, stage: Stage) -> Result<(), Failure> {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(Failure::Input(format!("invalid tolerance {}", args.tolerance)));
    }
    if args.grid_steps < MIN_GRID_STEPS {
        return Err(Failure::Input(format!(
            "--grid-steps must be at least {MIN_GRID_STEPS}"
        )));
    }
    let dataset = load(&args.common)?;
    let opts = PipelineOptions {
        stage,
        grid_steps: args.grid_steps,
        tolerance: args.tolerance,
    };
    let items = run_pipeline(&dataset, &opts);
    let failed: Vec<String> = items
        .iter()
        .filter(|r| r.invariant_failure())
        .map(|r| r.triple.item.clone())
        .collect();
    let report = Report::new(&dataset, &opts, items);
    let mut out = sink(&args.common.output)?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "model checks failed for: {}",
            failed.join(", ")
        )))
    }
}

fn run_curve(args: &CurveArgs) -> Result<(), Failure> {
    let (mu_a, mu_b, n) = match (args.mu_a, args.mu_b) {
        (Some(a), Some(b)) => {
            let n = args
                .n
                .ok_or_else(|| Failure::Input("--n is required with --mu-a/--mu-b".into()))?;
            (a, b, n)
        }
        (None, None) => {
            let dataset = load(&args.common)?;
            let [row] = dataset.rows.as_slice() else {
                return Err(Failure::Input(format!(
                    "curve needs --mu-a/--mu-b or exactly one row (got {}); use --item",
                    dataset.rows.len()
                )));
            };
            let n = match args.n {
                Some(n) => n,
                None => {
                    let fitted = fit(row, args.grid_steps).map_err(|e| Failure::Input(e.to_string()))?;
                    fitted
                        .params
                        .ok_or_else(|| Failure::Input(format!("no feasible fit for `{}`", row.item)))?
                        .n
                }
            };
            (row.mu_a, row.mu_b, n)
        }
        _ => return Err(Failure::Input("give both --mu-a and --mu-b".into())),
    };
    for (name, w) in [("mu_a", mu_a), ("mu_b", mu_b)] {
        if !(0.0..=1.0).contains(&w) {
            return Err(Failure::Input(format!("{name} = {w} outside [0, 1]")));
        }
    }
    let points = emit_curve(mu_a, mu_b, n, args.samples)?;
    let mut out = sink(&args.common.output)?;
    write_curve(&points, &mut out)?;
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<(), Failure> {
    let dataset = load(&args.common)?;
    let rows = dataset
        .rows
        .iter()
        .enumerate()
        .map(|(i, t)| synthesize_triple(t, args.draws, args.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Input(e.to_string()))?;
    let mut out = sink(&args.common.output)?;
    write_dataset(&rows, &mut out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Audit(a) => run_stage(a, Stage::Audit),
        Command::Fit(a) => run_stage(a, Stage::Fit),
        Command::Realize(a) => run_stage(a, Stage::Realize),
        Command::Verify(a) => run_stage(a, Stage::Verify),
        Command::Curve(a) => run_curve(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}
