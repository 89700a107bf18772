//! Command-line front end for the stiff-trajectory time-reparameterization
//! toolkit: generate reference data, reparameterize it, train and
//! evaluate surrogates, compare methods, and plot results.

mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::AppResult;

#[derive(Parser)]
#[command(
    name = "retime",
    about = "Time reparameterization of stiff ODE trajectories",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate reference trajectories over the selected mu values.
    Generate(CommonArgs),
    /// Reparameterize stored trajectories with the selected methods.
    Reparam(CommonArgs),
    /// Train one surrogate per method on the training-grid results.
    Train(CommonArgs),
    /// Evaluate trained surrogates against the stored references.
    Eval(CommonArgs),
    /// Compare the reparameterizations themselves (no training).
    Compare(CommonArgs),
    /// Render SVG plots and their data series.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// System name: sls, vdp or hires.
    #[arg(long)]
    system: Option<String>,
    /// Mu selection: 'training', 'test', 'both' or comma-separated
    /// log10 exponents (e.g. "1.05,2.5").
    #[arg(long)]
    mu: Option<String>,
    /// Relative tolerance of the implicit reference solver.
    #[arg(long)]
    rtol: Option<f64>,
    /// Absolute tolerance of the implicit reference solver.
    #[arg(long)]
    atol: Option<f64>,
    /// Stretched-time horizon tau_f.
    #[arg(long = "tau-f")]
    tau_f: Option<f64>,
    /// Uniform tau-grid resolution.
    #[arg(long = "n-tau")]
    n_tau: Option<usize>,
    /// Comma-separated methods: solver_directed, extrema_based, totr.
    #[arg(long)]
    method: Option<String>,
    /// RNG seed for training and sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel jobs for batch fan-out.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default: $RETIME_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PlotArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Plot kind: state-t, state-tau, time-map or dilation.
    #[arg(long)]
    kind: String,
    /// Log-scale y axis (dilation plots only).
    #[arg(long)]
    log: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            system: self.system.clone(),
            mu: self.mu.clone(),
            rtol: self.rtol,
            atol: self.atol,
            tau_f: self.tau_f,
            n_tau: self.n_tau,
            methods: self.method.clone(),
            seed: self.seed,
            jobs: self.jobs,
            out: self.out.clone(),
        }
    }

    fn load(&self) -> AppResult<RunConfig> {
        RunConfig::load(self.config.as_deref(), &self.overrides())
    }
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Generate(args) => commands::generate::run(&args.load()?),
        Command::Reparam(args) => commands::reparam::run(&args.load()?),
        Command::Train(args) => commands::train::run(&args.load()?),
        Command::Eval(args) => commands::eval::run(&args.load()?),
        Command::Compare(args) => commands::compare::run(&args.load()?),
        Command::Plot(args) => {
            let kind = commands::plot::PlotKind::from_name(&args.kind)?;
            commands::plot::run(&args.common.load()?, kind, args.log)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
