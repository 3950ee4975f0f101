use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qpspec_cli::{run, CliError, Options, RunConfig, Task};

/// Quasiperiodic Schrödinger spectral computations.
#[derive(Parser)]
#[command(name = "qpspec", version)]
struct Args {
    task: Task,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out_dir`, else `out/<task>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Cache directory for completed runs.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io { path: args.config.clone(), source })
        .and_then(|text| RunConfig::from_json(&text).map_err(CliError::from))
        .and_then(|config| {
            run(&config, args.task, &Options { out_dir: args.out, cache_dir: args.cache, threads: args.threads })
        });
    match result {
        Ok(record) => {
            println!("{}", serde_json::to_string_pretty(&record).expect("record serializes"));
            for w in &record.warnings {
                eprintln!("warning: {w}");
            }
            if record.health_failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &record.health_failures {
                    eprintln!("health check failed: {f}");
                }
                ExitCode::from(3)
            }
        }
        Err(e) => {
            match &e {
                CliError::Validation(issues) => {
                    eprintln!("invalid configuration:");
                    for i in issues {
                        eprintln!("  {i}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
