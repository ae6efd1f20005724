use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coftrl::config::{load_config, ExperimentConfig, ExperimentKind, VerifySpec};
use coftrl::runner::{run_experiment, RunSummary};

#[derive(Parser)]
#[command(name = "coftrl", version, about = "Cautious optimistic FTRL experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Seed for game generation and randomized adversaries.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of rounds.
    #[arg(long)]
    horizon: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check structural properties by random sampling.
    Verify {
        /// regularizers, solvers, learners, harness or all.
        #[arg(default_value = "all")]
        suite: String,
        /// Samples per property.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Multiplier applied to every curvature constant before checking.
        #[arg(long, default_value_t = 1.0)]
        gamma_scale: f64,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Tabulate the learning-rate map on a grid of two-action signals.
    Landscape {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn report(summary: &RunSummary) {
    if let Some(m) = &summary.metrics {
        println!("rounds: {}", m.horizon);
        for (i, r) in m.external_regret.iter().enumerate() {
            println!("player {i}: regret {r:.6}");
        }
        println!("social regret: {:.6}", m.social_regret);
        println!("path length: {:.6}", m.path_length);
        if let Some(gap) = m.cce_gap {
            println!("cce gap: {gap:.6e}");
        }
    }
    if let Some(t) = summary.switch_round {
        println!("safeguard switched after round {t}");
    }
    if let Some(v) = &summary.verify {
        println!("{v}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> coftrl::Result<bool> {
    let config = match cli.command {
        Command::Run { config, overrides } => {
            load_config(&config)?.with_overrides(overrides.seed, overrides.horizon, overrides.out)?
        }
        Command::Landscape { config, overrides } => {
            let mut cfg = load_config(&config)?;
            cfg.kind = ExperimentKind::Landscape;
            cfg.with_overrides(overrides.seed, overrides.horizon, overrides.out)?
        }
        Command::Verify { suite, samples, gamma_scale, overrides } => {
            let text = "kind = \"verify\"\n";
            let mut cfg: ExperimentConfig = coftrl::config::parse_config(text)?;
            cfg.verify = Some(VerifySpec { suite, samples, gamma_scale });
            cfg.with_overrides(overrides.seed, overrides.horizon, overrides.out)?
        }
    };
    let summary = run_experiment(&config)?;
    report(&summary);
    Ok(summary.success())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
