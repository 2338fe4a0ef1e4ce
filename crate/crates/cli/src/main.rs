use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use planar_density_cli::{config, run, Experiment, Format};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "planar-density", version, about = "Density experiments for point measures in normed planes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density profiles r^-α μ(B(x, r)).
    Density(Common),
    /// Exponent fits and oscillation verdicts across a measure fleet.
    Marstrand(Common),
    /// Quadratic decay of polarization averages.
    Decay(Common),
    /// Nonlinear barycenters.
    Barycenter(Common),
    /// Monotonicity classification and the two-direction construction.
    Monotonicity(Common),
    /// Shears making a line's normal weakly monotone.
    Shear(Common),
    /// Touching parallelograms and graph scans.
    Touching(Common),
    /// Radial integral identity.
    Radial(Common),
    /// Annuli packing check.
    Annuli(Common),
    /// One step of the end-to-end pipeline.
    Pipeline(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Density(c) => (Experiment::Density, c),
            Command::Marstrand(c) => (Experiment::Marstrand, c),
            Command::Decay(c) => (Experiment::Decay, c),
            Command::Barycenter(c) => (Experiment::Barycenter, c),
            Command::Monotonicity(c) => (Experiment::Monotonicity, c),
            Command::Shear(c) => (Experiment::Shear, c),
            Command::Touching(c) => (Experiment::Touching, c),
            Command::Radial(c) => (Experiment::Radial, c),
            Command::Annuli(c) => (Experiment::Annuli, c),
            Command::Pipeline(c) => (Experiment::Pipeline, c),
        }
    }
}

fn main_inner() -> Result<bool> {
    let (kind, args) = Cli::parse().command.split();
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = config::load(&args.config)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let out = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let report = run(kind, cfg, seed)?;
    let files = report.write(&out, args.format)?;
    eprintln!(
        "{}: {} asserted rows, {} failed",
        report.experiment,
        report.asserted(),
        report.failed()
    );
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(report.failed() == 0)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
