use abc_extremes_cli::commands::{adjust_command, summarize_command};
use abc_extremes_cli::config::{Config, ExperimentKind};
use abc_extremes_cli::experiments::{
    run_gev_experiment, run_maxstable_experiment, run_stereo_experiment,
};
use abc_extremes_cli::synth::generate_synthetic;
use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "abc-extremes",
    version,
    about = "Likelihood-free (ABC) inference for extreme value models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Divide the configured sample budget by this factor for desk-scale
    /// runs (recorded in the manifest).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<(Config, u64, PathBuf)> {
        let cfg = Config::load(&self.config)?;
        let seed = self.seed.unwrap_or(cfg.experiment.seed);
        let out = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&cfg.experiment.out_dir));
        if self.scale.is_nan() || self.scale < 1.0 {
            bail!("--scale must be >= 1");
        }
        Ok((cfg, seed, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic observed dataset for an experiment.
    Simulate(RunArgs),
    /// Run an ABC experiment end to end.
    #[command(subcommand)]
    Abc(AbcCommand),
    /// Regression-adjust an exported samples file.
    Adjust {
        /// Samples CSV produced by an `abc` run.
        #[arg(long)]
        samples: PathBuf,
        /// Observed summary JSON (written by the run as
        /// observed_summary.json, or any {"scheme", "values"} document).
        #[arg(long)]
        observed_summary: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Parameter coordinates to log-transform before the fit, e.g.
        /// "0,1".
        #[arg(long, value_delimiter = ',')]
        log_coords: Vec<usize>,
    },
    /// Weighted posterior summary of an exported samples file.
    Summarize {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum AbcCommand {
    /// Univariate GEV block maxima under four summary schemes.
    Gev(RunArgs),
    /// Stereological inclusions (spherical or ellipsoidal per the config).
    Stereo(RunArgs),
    /// Schlather max-stable process with Matérn dependence.
    Maxstable(RunArgs),
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => {
            let (cfg, seed, out) = args.resolve()?;
            let files = generate_synthetic(&cfg, seed, &out)?;
            for f in files {
                println!("wrote {}", out.join(f).display());
            }
        }
        Command::Abc(cmd) => {
            let (args, expected): (&RunArgs, &[ExperimentKind]) = match &cmd {
                AbcCommand::Gev(a) => (a, &[ExperimentKind::Gev]),
                AbcCommand::Stereo(a) => (
                    a,
                    &[ExperimentKind::StereoSphere, ExperimentKind::StereoEllipsoid],
                ),
                AbcCommand::Maxstable(a) => (a, &[ExperimentKind::Maxstable]),
            };
            let (cfg, seed, out) = args.resolve()?;
            if !expected.contains(&cfg.experiment.kind) {
                bail!(
                    "config experiment.kind = {} does not match this subcommand",
                    cfg.experiment.kind.name()
                );
            }
            match cfg.experiment.kind {
                ExperimentKind::Gev => {
                    let result = run_gev_experiment(&cfg, seed, args.scale, &out)?;
                    for entry in &result.manifest.runs {
                        println!(
                            "{}: h = {}, retained {} of {}",
                            entry.label,
                            entry.engine.h_realized,
                            entry.engine.retained,
                            entry.engine.n_samples
                        );
                    }
                }
                ExperimentKind::StereoSphere | ExperimentKind::StereoEllipsoid => {
                    let result = run_stereo_experiment(&cfg, seed, args.scale, &out)?;
                    for entry in &result.manifest.runs {
                        println!(
                            "{}: h = {}, retained {} of {} ({} failures)",
                            entry.label,
                            entry.engine.h_realized,
                            entry.engine.retained,
                            entry.engine.n_samples,
                            entry.engine.failures
                        );
                    }
                }
                ExperimentKind::Maxstable => {
                    let result = run_maxstable_experiment(&cfg, seed, args.scale, &out)?;
                    for entry in &result.manifest.runs {
                        println!(
                            "{}: h = {}, retained {} of {}",
                            entry.label,
                            entry.engine.h_realized,
                            entry.engine.retained,
                            entry.engine.n_samples
                        );
                    }
                }
            }
            println!("outputs in {}", out.display());
        }
        Command::Adjust {
            samples,
            observed_summary,
            out,
            log_coords,
        } => {
            let n = adjust_command(&samples, &observed_summary, &out, &log_coords)?;
            println!("adjusted {n} samples -> {}", out.display());
        }
        Command::Summarize { samples, out } => {
            let summary = summarize_command(&samples, &out)?;
            for c in &summary {
                println!(
                    "{}: mean {:.6} sd {:.6} [{:.6}, {:.6}]",
                    c.param, c.mean, c.sd, c.q025, c.q975
                );
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}
