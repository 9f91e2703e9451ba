use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(
    name = "lzphoton",
    version,
    about = "Landau-Zener single-photon source toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweeps and optimisation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accepted for interface stability; every run is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one pulse and write populations over time.
    Simulate(RunArgs),
    /// Scan rise time, sweep range or pulse shape.
    Sweep(RunArgs),
    /// Optimise the device design and its fabrication envelope.
    Optimize(RunArgs),
    /// Write the catapult trajectory.
    Catapult(RunArgs),
    /// Spectral leakage, thermal occupation and decay-during-pulse bounds.
    Leakage(RunArgs),
    /// Energy levels over a range of the control parameter.
    Spectrum(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration, or a JSON summary from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let (name, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Optimize(a) => ("optimize", a),
        Command::Catapult(a) => ("catapult", a),
        Command::Leakage(a) => ("leakage", a),
        Command::Spectrum(a) => ("spectrum", a),
    };
    match commands::run(name, &args.config, args.out.as_deref(), cli.seed) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
