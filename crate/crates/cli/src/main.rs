use std::path::PathBuf;
use std::process::ExitCode;

use aperiodic_cli::{run, Command, Context, ExperimentConfig};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Subcommand {
    Profile,
    Dimension,
    Entropy,
    Torus,
    Bernoulli,
    Hyperbolic,
    CheckClosing,
    Report,
}

impl From<Subcommand> for Command {
    fn from(s: Subcommand) -> Self {
        match s {
            Subcommand::Profile => Command::Profile,
            Subcommand::Dimension => Command::Dimension,
            Subcommand::Entropy => Command::Entropy,
            Subcommand::Torus => Command::Torus,
            Subcommand::Bernoulli => Command::Bernoulli,
            Subcommand::Hyperbolic => Command::Hyperbolic,
            Subcommand::CheckClosing => Command::CheckClosing,
            Subcommand::Report => Command::Report,
        }
    }
}

/// Shift functions, complexity estimates and closing checks.
///
/// Exit status: 0 on success, 1 if a check found counterexamples,
/// 2 on configuration or I/O errors.
#[derive(Debug, Parser)]
#[command(name = "aperiodic", version)]
struct Cli {
    #[arg(value_enum)]
    command: Subcommand,
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory; overrides `output.dir`, defaults to `out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; all cores if unset.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("--threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let dir = cli
        .out
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context { verbose: cli.verbose };
    let artifacts = match run(cli.command.into(), &config, ctx) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match artifacts.commit(&dir) {
        Ok(paths) => {
            for p in paths {
                ctx.verbose.then(|| eprintln!("[aperiodic] wrote {}", p.display()));
            }
        }
        Err(e) => {
            eprintln!("cannot write outputs to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    if artifacts.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &artifacts.failures {
            eprintln!("check failed: {f}");
        }
        ExitCode::from(1)
    }
}
