use std::path::PathBuf;
use std::process::ExitCode;

use atomnoise::config::{validate_config, ConfigError};
use atomnoise::presets;
use atomnoise::runner::{execute, plan_outputs};
use atomnoise::scan::with_workers;
use clap::{Parser, Subcommand};

/// Environment variable overriding the worker count when `--workers` is absent.
const WORKERS_ENV: &str = "ATOMNOISE_WORKERS";

#[derive(Parser)]
#[command(name = "atomnoise", version, about = "Quantum noise spectra of light transmitted through Zeeman-degenerate atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the noise frequency and write CSV tables plus run manifests.
    Scan {
        /// JSON configuration file.
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Bundled configuration (fig2 ... fig8).
        #[arg(long)]
        preset: Option<String>,
        /// Output CSV for single runs, output directory for multi-run files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: $ATOMNOISE_WORKERS, else all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Also emit the semiclassical and quantum contributions.
        #[arg(long)]
        decompose: bool,
    },
    /// List bundled presets, or print one.
    Presets { name: Option<String> },
}

const EXIT_INVALID: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

fn report(errors: &[ConfigError]) -> ExitCode {
    for e in errors {
        eprintln!("error: {e}");
    }
    ExitCode::from(EXIT_INVALID)
}

fn worker_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| format!("{WORKERS_ENV}={v} is not a positive integer"))?),
            Err(_) => None,
        },
    };
    match n {
        Some(0) => Err("worker count must be >= 1".into()),
        other => Ok(other),
    }
}

fn scan(config: Option<PathBuf>, preset: Option<String>, out: Option<PathBuf>, workers: Option<usize>, decompose: bool) -> ExitCode {
    let (text, stem) = match (&config, &preset) {
        (Some(path), _) => match std::fs::read_to_string(path) {
            Ok(t) => (t, path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scan".into())),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_INVALID);
            }
        },
        (None, Some(name)) => match presets::preset(name) {
            Some(t) => (t.to_string(), name.clone()),
            None => {
                let known: Vec<_> = presets::names().collect();
                eprintln!("error: unknown preset `{name}` (available: {})", known.join(", "));
                return ExitCode::from(EXIT_INVALID);
            }
        },
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    let mut file = match validate_config(&text) {
        Ok(f) => f,
        Err(errors) => return report(&errors),
    };
    if decompose {
        for run in &mut file.runs {
            run.decompose = true;
        }
    }
    let plans = match plan_outputs(&file, out.as_deref(), &stem) {
        Ok(p) => p,
        Err(errors) => return report(&errors),
    };
    let workers = match worker_count(workers) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let result = match workers {
        Some(n) => with_workers(n, || execute(&plans)).unwrap_or_else(|e| Err(std::io::Error::other(e))),
        None => execute(&plans),
    };
    let summaries = match result {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARTIAL);
        }
    };
    let mut partial = false;
    for s in &summaries {
        let failed = s.output.failed_points();
        if let Some(e) = &s.output.setup_error {
            eprintln!("{}: setup failed: {e}", s.plan.csv.display());
        } else if failed > 0 {
            eprintln!("{}: {failed} of {} points failed (NaN rows)", s.plan.csv.display(), s.output.rows.len());
        }
        partial |= !s.output.is_complete();
        println!("{}", s.plan.csv.display());
    }
    if partial {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("atomnoise=warn,atomnoise_core=error")).init();
    match Cli::parse().command {
        Command::Scan {
            config,
            preset,
            out,
            workers,
            decompose,
        } => scan(config, preset, out, workers, decompose),
        Command::Presets { name: None } => {
            for name in presets::names() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Presets { name: Some(name) } => match presets::preset(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown preset `{name}`");
                ExitCode::from(EXIT_INVALID)
            }
        },
    }
}
