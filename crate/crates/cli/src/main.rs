use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qglab::experiment::{run, Experiment, ExperimentConfig, ExperimentError};
use qglab::Exec;

#[derive(Parser)]
#[command(name = "qglab", version, about = "Numerical experiments for the dispersive dissipative QG equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Energy,
    Kernel,
    Strichartz,
    Converge,
    Stability,
    LpAudit,
}

impl From<Which> for Experiment {
    fn from(w: Which) -> Self {
        match w {
            Which::Energy => Experiment::Energy,
            Which::Kernel => Experiment::Kernel,
            Which::Strichartz => Experiment::Strichartz,
            Which::Converge => Experiment::Converge,
            Which::Stability => Experiment::Stability,
            Which::LpAudit => Experiment::LpAudit,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file; `default` or omitted uses built-in defaults.
    #[arg(long)]
    config: Option<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Run ladder points and transforms on the calling thread only.
    #[arg(long)]
    serial: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Energy inequality audit of the full equation.
    Energy(Common),
    /// Oscillatory kernel decay sweep and case integrals.
    Kernel(Common),
    /// Mixed space-time norms of the linear semigroup against A.
    Strichartz(Common),
    /// Distance to the x₁-independent limit against A.
    Converge(Common),
    /// Distance to the linear flow against A, with the perturbation split.
    Stability(Common),
    /// Bernstein, commutator and product audits.
    LpAudit(Common),
    /// Any experiment, named explicitly.
    Run {
        #[arg(long, value_enum)]
        experiment: Which,
        #[command(flatten)]
        common: Common,
    },
    /// Print the full default configuration of an experiment.
    Defaults {
        #[arg(value_enum)]
        experiment: Which,
    },
}

fn load(experiment: Experiment, common: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match common.config.as_deref() {
        None | Some("default") => ExperimentConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{path}: {e}")))?;
            ExperimentConfig::from_toml(&text)?
        }
    };
    cfg.experiment = experiment;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn execute(experiment: Experiment, common: &Common) -> Result<i32, ExperimentError> {
    let cfg = load(experiment, common)?;
    let exec = if common.serial { Exec::Serial } else { Exec::Parallel };
    let summary = run(&cfg, exec)?;
    for c in &summary.outcome.checks {
        println!("{} {} = {:.6e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
    }
    for n in &summary.outcome.notes {
        println!("note: {n}");
    }
    for f in &summary.outcome.failures {
        eprintln!("failed point: {f}");
    }
    println!("manifest: {}", summary.manifest.display());
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::Defaults { experiment } => {
            print!("{}", ExperimentConfig::for_experiment((*experiment).into()).to_toml());
            return ExitCode::SUCCESS;
        }
        Command::Run { experiment, common } => ((*experiment).into(), common),
        Command::Energy(c) => (Experiment::Energy, c),
        Command::Kernel(c) => (Experiment::Kernel, c),
        Command::Strichartz(c) => (Experiment::Strichartz, c),
        Command::Converge(c) => (Experiment::Converge, c),
        Command::Stability(c) => (Experiment::Stability, c),
        Command::LpAudit(c) => (Experiment::LpAudit, c),
    };
    let code = execute(experiment, common).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
