use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kuramoto_harness::{run, Experiment, ExperimentConfig};

/// Runs kinetic Kuramoto verification experiments.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on
/// configuration errors or violated preconditions.
#[derive(Parser)]
#[command(name = "kuramoto", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identical-oscillator diameter envelope.
    Sync(Common),
    /// Trapping width and entry time of non-identical oscillators.
    Trapping(Common),
    /// Exponential contraction of the modified Wasserstein distances.
    Contraction(Common),
    /// Self-convergence of Dirac-comb solutions.
    Meanfield(Common),
    /// Randomised audit of the dissipation inequality.
    Lemma54(Common),
    /// Quantile solver against the finite-volume solver.
    Crosscheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; the benchmark defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(experiment: Experiment, args: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::preset(experiment),
    };
    if cfg.experiment != experiment {
        bail!(
            "configuration is for `{}` but the subcommand is `{}`",
            cfg.experiment.name(),
            experiment.name()
        );
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Sync(a) => (Experiment::Sync, a),
        Command::Trapping(a) => (Experiment::Trapping, a),
        Command::Contraction(a) => (Experiment::Contraction, a),
        Command::Meanfield(a) => (Experiment::Meanfield, a),
        Command::Lemma54(a) => (Experiment::Lemma54, a),
        Command::Crosscheck(a) => (Experiment::Crosscheck, a),
    };
    let cfg = match load(experiment, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for n in &report.notes {
                println!("note: {n}");
            }
            println!("verdict: {:?}", report.verdict);
            println!("report: {}", cfg.output_dir.join("report.json").display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
