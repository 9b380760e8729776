use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use hallnum_cli::config::{parse_config, RunConfig};
use hallnum_cli::output::{config_digest, git_hash, write_manifest, write_tables, Manifest};
use hallnum_cli::run::{base_seed, dispatch, plan, Overrides};
use hallnum_cli::WORKERS_ENV;

/// Finite-size Hall conductance and localization experiments.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Realization workers; falls back to the config, then to HALLNUM_WORKERS, then 1.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory, overriding `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed, overriding `ensemble.seed`.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Validate the configuration and print the plan without computing.
    #[arg(long)]
    dry_run: bool,
}

fn workers(args: &Args, config: &RunConfig) -> Result<usize, String> {
    if let Some(w) = args.workers.or(config.ensemble.workers) {
        return if w == 0 { Err("worker count must be at least 1".into()) } else { Ok(w) };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(format!("{WORKERS_ENV}={v:?} is not a positive integer")),
        },
        Err(_) => Ok(1),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let digest = config_digest(&config);
    if let Some(dir) = &args.out {
        config.output.directory = dir.clone();
    }
    let overrides = match workers(&args, &config) {
        Ok(w) => Overrides { workers: w, seed: args.seed_override },
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    if args.dry_run {
        let (diagonalizations, dim) = plan(&config);
        println!("experiment: {}", config.experiment.name());
        println!("energies: {}, lambdas: {}", config.ensemble.energies.len(), config.ensemble.lambdas.len());
        println!("diagonalizations: {diagonalizations} (largest dimension {dim})");
        println!("realizations: {}, base seed: {}, workers: {}", config.ensemble.realizations, base_seed(&config, &overrides), overrides.workers);
        println!("output: {}", config.output.directory.display());
        for d in &config.defaulted {
            println!("defaulted: {d}");
        }
        return ExitCode::SUCCESS;
    }

    let start = Instant::now();
    let outcome = match dispatch(&config, &overrides) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let dir = config.output.directory.clone();
    let files = match write_tables(&dir, &outcome.tables, &config.output.formats) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    };
    let status = if outcome.failures > 0 { 2 } else { 0 };
    let manifest = Manifest {
        schema_version: hallnum_cli::config::SCHEMA_VERSION,
        experiment: config.experiment.name(),
        code_version: env!("CARGO_PKG_VERSION"),
        git_hash: git_hash(),
        config_path: Some(args.config.display().to_string()),
        config_digest: digest,
        seed_override: args.seed_override,
        base_seed: base_seed(&config, &overrides),
        seeds: outcome.seeds.clone(),
        workers: overrides.workers,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files,
        warnings: outcome.warnings.clone(),
        defaulted: config.defaulted.clone(),
        failures: outcome.failures,
        exit_status: status,
        summary: outcome.summary.clone(),
        config,
    };
    if let Err(e) = write_manifest(&dir, &manifest) {
        eprintln!("error: cannot write the manifest: {e}");
        return ExitCode::from(1);
    }
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} file(s) and manifest.json to {}", manifest.files.len(), dir.display());
    ExitCode::from(status as u8)
}
