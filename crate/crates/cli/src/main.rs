use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use digimc_cli::{analyze, config, Mode};

/// Path-integral Monte Carlo for digitized bosons.
#[derive(Parser)]
#[command(name = "digimc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thermal averages of a single boson by exact diagonalization.
    ExactDiag(RunArgs),
    /// Monte Carlo of the quartic single boson.
    McSingle(RunArgs),
    /// Monte Carlo of the free scalar field on a periodic lattice.
    McLattice(RunArgs),
    /// Aggregate stream output of earlier runs.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $DIGIMC_OUT/<mode>, or digimc-out/<mode>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; stream seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent streams.
    #[arg(long)]
    streams: Option<usize>,
    /// Measured sweeps per stream, after burn-in.
    #[arg(long)]
    sweeps: Option<usize>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    threads: Option<usize>,
    /// Override a configuration key, e.g. `--set trotter.delta=0.002`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Run directories, or directories containing them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory [default: the first input].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference value for an observable, e.g. `--exact potential=0.2539`.
    #[arg(long, value_name = "OBSERVABLE=VALUE")]
    exact: Vec<String>,
}

fn default_out(mode: Mode) -> PathBuf {
    let root =
        std::env::var_os("DIGIMC_OUT").map_or_else(|| PathBuf::from("digimc-out"), PathBuf::from);
    root.join(mode.name())
}

fn run(mode: Mode, args: RunArgs) -> Result<()> {
    let mut overrides = args.overrides;
    let flags = [
        ("schedule.seed", args.seed.map(|v| v.to_string())),
        ("schedule.streams", args.streams.map(|v| v.to_string())),
        ("schedule.sweeps", args.sweeps.map(|v| v.to_string())),
        ("schedule.threads", args.threads.map(|v| v.to_string())),
    ];
    overrides.extend(
        flags
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k}={v}"))),
    );
    let raw = config::load(args.config.as_deref(), &overrides)?;
    let config = config::resolve(mode, raw)?;
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| default_out(mode));
    log::info!(
        "{mode}: {} point(s), output in {}",
        config.points.len(),
        out.display()
    );
    digimc_cli::execute(&config, &out)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::ExactDiag(args) => run(Mode::ExactDiag, args),
        Command::McSingle(args) => run(Mode::McSingle, args),
        Command::McLattice(args) => run(Mode::McLattice, args),
        Command::Analyze(args) => {
            let exact = analyze::parse_exact(&args.exact)?;
            let out = args.out.unwrap_or_else(|| args.inputs[0].clone());
            analyze::analyze(&args.inputs, &out, &exact).map(|_| ())
        }
    }
}
