use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chainlab::config::ExperimentConfig;
use chainlab::experiment::{describe, run, Overrides};

#[derive(Parser)]
#[command(name = "chainlab", about = "Run and plan stretched-chain convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding `[experiment] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, overriding `[experiment] workers` (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment and write its artifacts.
    Run(Common),
    /// Print the plan without simulating anything.
    Describe(Common),
    /// Print the version.
    Version,
}

fn load(c: &Common) -> chainlab::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    Overrides { seed: c.seed, out: c.out.clone(), workers: c.workers }.apply(&mut cfg);
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Version => {
            println!("chainlab {}", env!("CARGO_PKG_VERSION"));
            return ExitCode::SUCCESS;
        }
        Command::Describe(c) => load(&c).and_then(|cfg| describe(&cfg)).map(|text| {
            print!("{text}");
            0
        }),
        Command::Run(c) => load(&c).and_then(|cfg| run(&cfg)).map(|outcome| {
            for f in outcome.failures() {
                eprintln!("FAIL {} (d = {:?}): {}", f.name, f.d, f.value);
            }
            println!(
                "{} checks, {} failed; artifacts in {}",
                outcome.checks.len(),
                outcome.failures().count(),
                outcome.out_dir.display()
            );
            outcome.exit_code()
        }),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
