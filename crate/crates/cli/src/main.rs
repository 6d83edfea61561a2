mod commands;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwalk::detectors::DetectorConfig;
use qwalk::graph::Format;
use qwalk::spectral::DEFAULT_MAX_N;

use crate::input::InputError;

#[derive(Parser, Debug)]
#[command(
    name = "qwalk",
    version,
    about = "Continuous-time quantum walk analysis"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Report,
    Scan,
    Blocks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    Return,
    Transfer,
    Realness,
    Flatness,
    Uniform,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Input format: edge-list, graph6 or json.
    #[arg(long, global = true, default_value = "edge-list")]
    format: String,
    /// Read the input as an oriented graph (arc list or JSON arcs).
    #[arg(long, global = true)]
    oriented: bool,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = qwalk::arithmetic::DEFAULT_CERT_TOL)]
    cert_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    accept_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    flat_tol: f64,
    #[arg(long, global = true, default_value_t = qwalk::arithmetic::DEFAULT_MAX_DEN)]
    max_den: u64,
    #[arg(long, global = true, default_value_t = 20.0)]
    t_max: f64,
    /// Grid step for scans and searches; each search has its own default.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Report)]
    emit: Emit,
    /// Seed for randomized sampling (invariant-suite sample times).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distinct eigenvalues, multiplicities and decomposition residuals.
    Spectra { input: String },
    /// Periodicity, state transfer, candidates, mixing and bounds for one state.
    Analyze {
        input: String,
        /// `vertex:<label>`, `mixed`, or a JSON density-matrix file.
        #[arg(long)]
        state: String,
    },
    /// Run the invariant suite; exit 1 if any invariant fails.
    Verify {
        input: String,
        /// Optional JSON density-matrix file to check as well.
        #[arg(long)]
        state: Option<String>,
    },
    /// The state at time `t`.
    Evolve {
        input: String,
        #[arg(long)]
        state: String,
        #[arg(long, allow_hyphen_values = true)]
        time: f64,
    },
    /// Brute-force oracle scan over `[0, t_max]`.
    Scan {
        input: String,
        #[arg(long, value_enum, default_value_t = ScanKind::Return)]
        kind: ScanKind,
        #[arg(long)]
        state: Option<String>,
        /// Target state for `--kind transfer`.
        #[arg(long)]
        target: Option<String>,
    },
    /// Natural orientation of a bipartite graph, written in `--format`.
    Orient { input: String },
}

pub struct Run {
    pub format: Format,
    pub oriented: bool,
    pub detector: DetectorConfig,
    pub emit: Emit,
    pub seed: u64,
    pub max_n: usize,
}

fn config(args: &RunArgs) -> anyhow::Result<Run> {
    let format: Format = args
        .format
        .parse()
        .map_err(|e: qwalk::Error| input::input_error(e.to_string()))?;
    let detector = DetectorConfig {
        tol: args.tol,
        cert_tol: args.cert_tol,
        accept_tol: args.accept_tol,
        flat_tol: args.flat_tol,
        max_den: args.max_den,
        t_max: args.t_max,
        grid_step: args.grid_step,
    };
    input::lib(detector.validate())?;
    let max_n = match std::env::var("QWALK_MAX_N") {
        Ok(v) => v.parse().map_err(|_| {
            input::input_error(format!("QWALK_MAX_N must be a positive integer, got {v:?}"))
        })?,
        Err(_) => DEFAULT_MAX_N,
    };
    Ok(Run {
        format,
        oriented: args.oriented,
        detector,
        emit: args.emit,
        seed: args.seed,
        max_n,
    })
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = config(&cli.run)?;
    match cli.command {
        Command::Spectra { input } => commands::spectra(&input, &cfg),
        Command::Analyze { input, state } => commands::analyze(&input, &state, &cfg),
        Command::Verify { input, state } => commands::verify(&input, state.as_deref(), &cfg),
        Command::Evolve { input, state, time } => commands::evolve(&input, &state, time, &cfg),
        Command::Scan {
            input,
            kind,
            state,
            target,
        } => commands::scan(&input, kind, state.as_deref(), target.as_deref(), &cfg),
        Command::Orient { input } => commands::orient(&input, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
