//! `infomenu`: figure data and verification for information menus.

mod commands;
mod config;
mod output;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ScenarioFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] infomenu_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Parser)]
#[command(name = "infomenu", version, about = "Optimal menus of information sold to a competitor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Buyer gain across types for one or more informativeness values.
    GainCurve {
        /// Comma-separated informativeness values in [-1, 1].
        #[arg(long = "I", value_delimiter = ',', allow_hyphen_values = true, required = true,
              value_parser = parse_informativeness)]
        informativeness: Vec<f64>,
        /// Points on the type grid.
        #[arg(long, default_value_t = commands::DEFAULT_BELIEF_GRID)]
        grid: usize,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-type menu and decision-boundary grids.
    Binary {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Points per v_s and tau sweep, overriding the config.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Virtual values, step menus and profit baselines for a type distribution.
    Continuous {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Points on the type grid.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run the oracle battery and print one JSON report per line.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Resolution of the brute-force searches.
        #[arg(long)]
        grid: Option<usize>,
        /// Also write the reports to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_informativeness(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    if (-1.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [-1, 1]"))
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run_verify(
    config: &Path,
    samples: Option<u64>,
    seed: Option<u64>,
    grid: Option<usize>,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let file = ScenarioFile::load(config)?;
    let mc = file.mc(samples, seed)?;
    let reports = verify::battery(&file, &mc, grid)?;
    let mut lines = String::new();
    for r in &reports {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    std::io::stdout().write_all(lines.as_bytes())?;
    if let Some(path) = out {
        std::fs::write(path, &lines)?;
    }
    let failures: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass && !r.informational)
        .map(|r| r.quantity.as_str())
        .collect();
    if !failures.is_empty() {
        eprintln!("{} of {} checks failed: {}", failures.len(), reports.len(), failures.join(", "));
    }
    Ok(failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GainCurve {
            informativeness,
            grid,
            out,
        } => commands::gain_curve(informativeness, *grid, out.as_deref()).map(|_| true),
        Command::Binary { config, out, grid } => ScenarioFile::load(config)
            .and_then(|f| commands::binary(&f, out, *grid))
            .map(|p| {
                report_written(&p);
                true
            }),
        Command::Continuous { config, out, grid } => ScenarioFile::load(config)
            .and_then(|f| commands::continuous(&f, out, *grid))
            .map(|p| {
                report_written(&p);
                true
            }),
        Command::Verify {
            config,
            samples,
            seed,
            grid,
            out,
        } => run_verify(config, *samples, *seed, *grid, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
