use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};
use spreadrate::runner::{
    emit_csv, report_figure, resolve_workers, run_sweep, Engine, Figure, ReportError, ReportOptions,
    ScenarioConfig, SweepError, WORKERS_ENV,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_LANDMARK: u8 = 3;

#[derive(Parser)]
#[command(name = "spreadrate", version, about = "Ergodic rate versus angular spread in multi-cell massive MIMO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML scenario file and write CSVs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to $SPREADRATE_WORKERS, then the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated subset of `analytic`, `mc`.
        #[arg(long, value_delimiter = ',')]
        engines: Option<Vec<Engine>>,
    },
    /// Regenerate a figure preset and check its landmarks.
    Report {
        /// fig2 .. fig10
        figure: Figure,
        #[arg(long)]
        out: PathBuf,
        /// Monte Carlo realizations per point.
        #[arg(long, default_value_t = ReportOptions::default().n_realizations)]
        realizations: usize,
        #[arg(long, default_value_t = ReportOptions::default().seed)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Simulate {
            config,
            out,
            seed,
            workers,
            engines,
        } => simulate(config, out, seed, workers, engines),
        Command::Report {
            figure,
            out,
            realizations,
            seed,
            workers,
        } => report(figure, out, realizations, seed, workers),
    }
}

fn simulate(
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    workers: Option<usize>,
    engines: Option<Vec<Engine>>,
) -> ExitCode {
    let mut cfg = match ScenarioConfig::from_path(&config) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(mut e) = engines {
        e.sort();
        e.dedup();
        cfg.engines = e;
    }
    let workers = resolve_workers(workers);
    if let Some(n) = workers {
        info!("{n} workers (flag or {WORKERS_ENV})");
    }
    let result = match run_sweep(&cfg, workers) {
        Ok(r) => r,
        Err(SweepError::Config(e)) => {
            error!("{e}");
            return ExitCode::from(EXIT_INVALID);
        }
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    match emit_csv(&result, &out) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            for e in &result.extrema {
                println!(
                    "{} {} M={} {}: AS = {} deg, rate {:.4}",
                    e.kind, e.precoder, e.m, e.engine, e.as_deg, e.rate
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn report(figure: Figure, out: PathBuf, realizations: usize, seed: u64, workers: Option<usize>) -> ExitCode {
    let opts = ReportOptions {
        n_realizations: realizations,
        seed,
        workers: resolve_workers(workers),
    };
    match report_figure(figure, &out, &opts) {
        Ok(rep) => {
            for f in &rep.files {
                println!("{}", f.display());
            }
            for c in &rep.checks {
                println!("{c}");
            }
            if rep.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_LANDMARK)
            }
        }
        Err(ReportError::Sweep(SweepError::Config(e))) => {
            error!("{e}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
