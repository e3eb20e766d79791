//! Command-line front end: noise training, privacy analysis, the
//! tracking simulation, and `(epsilon, d)` sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dpzono::noise::{
    self, file as noise_file, laplace_range, optimize_distribution, OptimizerConfig,
    TruncatedNoiseDistribution,
};
use dpzono::sigfig::format_sig12;
use dpzono::sim::{self, files, NoiseSource, SimConfig};

#[derive(Parser)]
#[command(
    name = "dpzono",
    version,
    about = "Differentially private set-based state estimation with zonotopes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a truncated noise distribution and write it to a JSON file
    NoiseOptimize {
        /// Privacy budget epsilon
        #[arg(long)]
        epsilon: f64,
        /// Noise half-range d
        #[arg(long)]
        range: f64,
        /// Bins per half-range N (the grid has 2N points)
        #[arg(long)]
        bins: u32,
        /// Sensitivity s; must be a multiple of range / bins
        #[arg(long)]
        sensitivity: f64,
        /// Utility norm selector (1 or 2)
        #[arg(long, default_value_t = 1)]
        gamma: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output noise file
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5000)]
        epochs: u32,
        #[arg(long, default_value_t = 0.05)]
        learning_rate: f64,
        #[arg(long, default_value_t = 1.0)]
        omega_start: f64,
        #[arg(long, default_value_t = 0.001)]
        omega_min: f64,
        /// Utility-weight half-life in epochs
        #[arg(long, default_value_t = 500.0)]
        decay_epochs: f64,
        /// Number of stacked sigmoids in the noise model
        #[arg(long, default_value_t = 10)]
        sigmoids: usize,
        /// Fixed sigmoid steepness C
        #[arg(long, default_value_t = 500.0)]
        steepness: f64,
    },
    /// Recompute the privacy slack delta of a stored distribution
    NoiseDelta {
        /// Noise file to analyze
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        sensitivity: f64,
    },
    /// Truncated-Laplace range needed for a target (epsilon, delta)
    LaplaceRange {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        sensitivity: f64,
    },
    /// Run the tracking experiment and write a trace CSV and summary
    Simulate {
        /// Simulation config JSON; defaults to the bundled scenario
        #[arg(long)]
        config: Option<PathBuf>,
        /// Noise file for the private run; without it (and without a
        /// noise source in the config) the run is non-private
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Trace CSV output path
        #[arg(long)]
        out: PathBuf,
        /// Summary JSON output path; printed to stdout when omitted
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Sweep (epsilon, d) cells and write the results table
    Sweep {
        /// Simulation config JSON; defaults to the bundled scenario
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7")]
        epsilons: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7,9,11,13,15")]
        ranges: Vec<f64>,
        /// Monte-Carlo runs per cell; defaults to the config value
        #[arg(long)]
        runs: Option<u32>,
        /// Optimizer epochs per cell
        #[arg(long, default_value_t = 5000)]
        epochs: u32,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 3,
        }
    }
}

impl From<dpzono::Error> for CliError {
    fn from(e: dpzono::Error) -> Self {
        CliError::invalid(e.to_string())
    }
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn load_config(path: &Option<PathBuf>) -> Result<(SimConfig, Option<files::SimConfigFile>), CliError> {
    match path {
        Some(p) => {
            let (cfg, file) = files::read_config(p)
                .map_err(|e| CliError::invalid(format!("config {}: {e}", p.display())))?;
            Ok((cfg, Some(file)))
        }
        None => Ok((SimConfig::circular_tracking_default(), None)),
    }
}

fn load_noise(path: &Path) -> Result<noise_file::LoadedNoise, CliError> {
    noise_file::read(path)
        .map_err(|e| CliError::invalid(format!("noise file {}: {e}", path.display())))
}

/// Picks the distribution for a simulate run: an explicit `--noise`
/// flag wins, then the config's `noise_file`, then its inline
/// distribution.
fn resolve_noise(
    flag: &Option<PathBuf>,
    config_path: &Option<PathBuf>,
    config_file: &Option<files::SimConfigFile>,
) -> Result<Option<TruncatedNoiseDistribution>, CliError> {
    if let Some(p) = flag {
        return Ok(Some(load_noise(p)?.distribution));
    }
    let Some(dp) = config_file.as_ref().and_then(|f| f.dp.as_ref()) else {
        return Ok(None);
    };
    if let Some(rel) = &dp.noise_file {
        let base = config_path
            .as_ref()
            .and_then(|p| p.parent())
            .unwrap_or(Path::new("."));
        return Ok(Some(load_noise(&base.join(rel))?.distribution));
    }
    if let Some(inline) = &dp.distribution {
        let loaded = inline
            .decode()
            .map_err(|e| CliError::invalid(format!("inline distribution: {e}")))?;
        return Ok(Some(loaded.distribution));
    }
    Ok(None)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::NoiseOptimize {
            epsilon,
            range,
            bins,
            sensitivity,
            gamma,
            seed,
            out,
            epochs,
            learning_rate,
            omega_start,
            omega_min,
            decay_epochs,
            sigmoids,
            steepness,
        } => {
            let cfg = OptimizerConfig {
                epsilon,
                sensitivity,
                gamma,
                omega_start,
                omega_min,
                decay_epochs,
                epochs,
                learning_rate,
                seed,
            };
            let (params, dist) = optimize_distribution(&cfg, range, bins, sigmoids, steepness)?;
            let utility = noise::utility_loss(&dist, gamma)?;
            let file = noise_file::NoiseFile::from_parts(&dist, &params, &cfg);
            write_output(&out, &(file.to_json()? + "\n"))?;
            println!(
                "{{\"delta\": {}, \"utility\": {}}}",
                format_sig12(dist.delta()),
                format_sig12(utility)
            );
            Ok(())
        }
        Command::NoiseDelta {
            dist,
            epsilon,
            sensitivity,
        } => {
            let loaded = load_noise(&dist)?;
            let delta = noise::delta_of(&loaded.distribution, epsilon, sensitivity)?;
            println!("{{\"delta\": {}}}", format_sig12(delta));
            Ok(())
        }
        Command::LaplaceRange {
            epsilon,
            delta,
            sensitivity,
        } => {
            let range = laplace_range(epsilon, delta, sensitivity)?;
            println!("{{\"range\": {}}}", format_sig12(range));
            Ok(())
        }
        Command::Simulate {
            config,
            noise,
            out,
            summary,
        } => {
            let (cfg, config_file) = load_config(&config)?;
            let dist = resolve_noise(&noise, &config, &config_file)?;
            let source = match &dist {
                Some(d) => {
                    if let Some(dp) = &cfg.dp {
                        sim::check_dp_match(dp, d)?;
                    }
                    NoiseSource::Optimal(d)
                }
                None => NoiseSource::None,
            };
            let (trace, stats) = sim::monte_carlo(&cfg, source)?;
            write_output(&out, &files::trace_csv(&trace))?;
            let summary_text = files::summary_json(&stats)?;
            match summary {
                Some(p) => write_output(&p, &summary_text)?,
                None => print!("{summary_text}"),
            }
            Ok(())
        }
        Command::Sweep {
            config,
            epsilons,
            ranges,
            runs,
            epochs,
            out,
        } => {
            let (cfg, _) = load_config(&config)?;
            let runs = runs.unwrap_or(cfg.runs);
            let result = sim::sweep(&cfg, &epsilons, &ranges, runs, epochs)?;
            write_output(&out, &files::sweep_csv(&result))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
