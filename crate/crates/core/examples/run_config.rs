//! Drive a whole experiment from a TOML file, as the `chainlab` binary does.
//!
//! cargo run --example run_config -- crates/core/configs/deterministic.toml [out-dir]

use std::path::PathBuf;

use chainlab::experiment::{describe, run_file, Overrides};
use chainlab::config::ExperimentConfig;

fn main() -> chainlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/deterministic.toml")));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("chainlab-example"));

    print!("{}", describe(&ExperimentConfig::load(&config)?)?);
    let outcome = run_file(&config, &Overrides { out: Some(out), ..Overrides::default() })?;
    println!("\nwrote {} files to {}", outcome.files.len(), outcome.out_dir.display());
    for c in &outcome.checks {
        println!("  {:<36} {:<12} {:.4e}", c.name, c.verdict.as_str(), c.value);
    }
    std::process::exit(outcome.exit_code());
}
