use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nsalpha_cli::{load_config, run, CliError, Mode};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Simulate,
    Optimize,
    SweepAlpha,
    Verify,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Simulate => Mode::Simulate,
            ModeArg::Optimize => Mode::Optimize,
            ModeArg::SweepAlpha => Mode::SweepAlpha,
            ModeArg::Verify => Mode::Verify,
        }
    }
}

/// Optimal control of the Navier-Stokes-alpha equations on the periodic torus.
///
/// Exit status: 0 success, 1 invalid arguments or configuration, 2 solver or
/// I/O failure, 3 failed verification check.
#[derive(Debug, Parser)]
#[command(name = "nsalpha", version)]
struct Cli {
    /// What to run; overrides `mode` in the configuration file.
    mode: ModeArg,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every random draw; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps (default: one per core).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let mut cfg = load_config(&cli.config)?;
    cfg.mode = cli.mode.into();
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.into())
            .build_global()
            .expect("the global pool is configured once, before any parallel work");
    }
    let summary = run(&cfg)?;
    println!("{}", summary.report);
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(summary.exit_code())
}
