//! declab: configuration-driven experiments on the decoherence of
//! symmetry-breaking vacua.
//!
//! Subcommands: `run` (full pipeline with CSV/JSON emission), `verify`
//! (certificate suite with meaningful exit codes), `sweep` (scaling sweep
//! with log-log fit summary), `schema` (config and output documentation).

mod config;
mod experiment;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::ExperimentConfig;
use experiment::{expand_sweep, run_point_with_context, PointResult};

#[derive(Parser)]
#[command(name = "declab", version, about = "decoherence laboratory for symmetry-breaking vacua")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment pipeline and write CSV/JSON outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides DECLAB_OUT and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override for randomized suites.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweep points (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the certificate suite; exit 0 iff everything passes.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Scaling sweep with log-log fit exponents.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the config schema and output-column documentation.
    Schema,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Schema => {
            print!("{}", config::SCHEMA_TEXT);
            0
        }
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => dispatch(config, seed, threads, |cfg| cmd_run(cfg, out.as_deref(), false)),
        Command::Sweep {
            config,
            out,
            seed,
            threads,
        } => dispatch(config, seed, threads, |cfg| cmd_run(cfg, out.as_deref(), true)),
        Command::Verify {
            config,
            seed,
            threads,
        } => dispatch(config, seed, threads, cmd_verify),
    };
    ExitCode::from(code as u8)
}

/// Parse the config (exit 2 on any config problem), apply overrides, build
/// the thread pool, and run the body.
fn dispatch(
    path: PathBuf,
    seed: Option<u64>,
    threads: Option<usize>,
    body: impl FnOnce(&ExperimentConfig) -> i32,
) -> i32 {
    let mut cfg = match ExperimentConfig::from_path(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return 2;
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    body(&cfg)
}

fn cmd_run(config: &ExperimentConfig, out_flag: Option<&std::path::Path>, sweep_mode: bool) -> i32 {
    let started = Instant::now();
    let out_dir = output::resolve_out_dir(out_flag, config);
    let points_cfg = expand_sweep(config);
    eprintln!(
        "running {} point(s) -> {}",
        points_cfg.len(),
        out_dir.display()
    );
    let results: Vec<Result<PointResult>> = points_cfg
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| run_point_with_context(i, cfg))
        .collect();

    let mut completed = Vec::new();
    let mut first_error: Option<anyhow::Error> = None;
    for r in results {
        match r {
            Ok(p) => completed.push(p),
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    completed.sort_by_key(|p| p.point);

    for p in &completed {
        for w in &p.warnings {
            eprintln!("warning (point {}): {w}", p.point);
        }
    }

    let status = if first_error.is_some() { "failed" } else { "ok" };
    let record = output::RunRecord {
        config_hash: output::config_hash(config),
        code_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        status,
        error: first_error.as_ref().map(|e| format!("{e:#}")),
        wall_clock_ms: started.elapsed().as_millis(),
        points: &completed,
    };
    let emit = || -> Result<()> {
        output::write_file(&out_dir, "record.json", &serde_json::to_string_pretty(&record)?)?;
        if sweep_mode {
            output::write_file(&out_dir, "sweep.csv", &output::sweep_csv(&completed))?;
            let summary = output::sweep_summary(&completed);
            let summary_json = serde_json::to_string_pretty(&summary)?;
            output::write_file(&out_dir, "sweep_summary.json", &summary_json)?;
            println!("{summary_json}");
        } else {
            output::write_file(&out_dir, "run.csv", &output::run_csv(&completed))?;
        }
        output::write_file(
            &out_dir,
            "certificates.json",
            &output::certificates_json(&completed)?,
        )?;
        for p in &completed {
            if let Some(csv) = &p.trajectory_csv {
                output::write_file(&out_dir, &format!("trajectory_{}.csv", p.point), csv)?;
            }
            if let Some(csv) = &p.g_matrix_csv {
                output::write_file(&out_dir, &format!("g_matrix_{}.csv", p.point), csv)?;
            }
        }
        Ok(())
    };
    if let Err(e) = emit() {
        eprintln!("output error: {e:#}");
        return 2;
    }

    if let Some(e) = first_error {
        eprintln!("run failed: {e:#}");
        return experiment::exit_code_for_error(&e);
    }
    let all_passed = completed.iter().all(|p| p.certificates_passed);
    let any_convergence_failure = completed.iter().any(|p| {
        p.outcomes
            .iter()
            .any(|o| o.kind == experiment::OutcomeKind::Convergence && o.pass == Some(false))
    });
    eprintln!(
        "done in {:?}: {} point(s), certificates {}",
        started.elapsed(),
        completed.len(),
        if all_passed { "all passed" } else { "FAILED" }
    );
    if any_convergence_failure {
        3
    } else if !all_passed {
        1
    } else {
        0
    }
}

fn cmd_verify(config: &ExperimentConfig) -> i32 {
    match verify::verify(config) {
        Ok(summary) => {
            for o in &summary.outcomes {
                let tag = match o.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "SKIP (preconditions unmet)",
                };
                println!("[{tag}] {}", o.name);
            }
            if let Some(name) = &summary.first_failure {
                println!("first failing certificate: {name}");
            } else {
                println!("all certificates passed");
            }
            summary.exit_code
        }
        Err(e) => {
            eprintln!("verify failed: {e:#}");
            experiment::exit_code_for_error(&e)
        }
    }
}
