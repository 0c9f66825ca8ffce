use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noise_radar::runner::{run_sweep, validate_config, OutputKind, SweepConfig};

/// Quantum and classical noise radar: correlation, ROC and error-exponent datasets.
#[derive(Parser)]
#[command(name = "noise-radar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and print it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write every output listed in the config.
    Sweep(RunArgs),
    /// Write only the ROC curves.
    Roc(RunArgs),
    /// Write only the Stein exponents.
    Stein(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed; overrides `detection.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(path: &Path) -> Result<SweepConfig, ExitCode> {
    validate_config(path).map_err(|errs| {
        for issue in &errs.0 {
            eprintln!("error: {issue}");
        }
        ExitCode::from(2)
    })
}

fn run(args: RunArgs, only: Option<OutputKind>) -> Result<(), ExitCode> {
    let mut config = load(&args.config)?;
    if let (Some(seed), Some(d)) = (args.seed, config.detection.as_mut()) {
        d.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_path = out.to_string_lossy().into_owned();
    }
    let job = || run_sweep(&config, only);
    let result = match args.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| {
                eprintln!("error: cannot start thread pool: {e}");
                ExitCode::FAILURE
            })?;
            pool.install(job)
        }
        None => job(),
    };
    let output = result.map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })?;
    let written = output.write_to(&PathBuf::from(&config.output_path)).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })?;
    let mut stdout = std::io::stdout().lock();
    for p in written {
        let _ = writeln!(stdout, "{}", p.display());
    }
    for e in &output.manifest.errors {
        eprintln!("warning: point {} ({:?}): {}", e.index, e.output, e.message);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => load(&config).map(|c| {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&c).expect("config serializes"));
        }),
        Command::Sweep(a) => run(a, None),
        Command::Roc(a) => run(a, Some(OutputKind::Roc)),
        Command::Stein(a) => run(a, Some(OutputKind::Stein)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
