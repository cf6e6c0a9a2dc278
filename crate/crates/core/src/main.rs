use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stormgrid::config::{Mode, Overrides, RunConfig};
use stormgrid::pipeline::{self, ArtifactWriter, PipelineError};

/// Typhoon resilience assessment for geo-referenced transmission networks.
#[derive(Parser)]
#[command(name = "stormgrid", version, about)]
struct Cli {
    /// Run configuration file (TOML).
    #[arg(long, global = true, default_value = "run.toml")]
    config: PathBuf,

    /// Directory for report artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Override the configured mode.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<Mode>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the enumeration order J.
    #[arg(long, global = true)]
    j: Option<usize>,

    /// Override the tower spacing in metres.
    #[arg(long, global = true)]
    spacing_m: Option<f64>,

    /// Override the simulation step in minutes.
    #[arg(long, global = true)]
    dt_min: Option<f64>,

    /// Worker threads (defaults to the machine's cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "model-driven" => Ok(Mode::ModelDriven),
        "hybrid" => Ok(Mode::Hybrid),
        other => Err(format!(
            "unknown mode {other:?} (expected model-driven or hybrid)"
        )),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Wind speed time series at corridor midpoints for the reference storm.
    SimulateWind,
    /// Cumulative corridor failure-rate curves, model-driven and corrected.
    FailureRates,
    /// Train the weight schemes and report the AHP-WAA selection.
    Weights,
    /// System and corridor resilience indices against the target.
    Assess {
        /// Exit with status 4 when the index misses the target.
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate and rank the hardening strategy menu.
    Strategies,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let overrides = Overrides {
        mode: cli.mode,
        seed: cli.seed,
        j_max: cli.j,
        spacing_m: cli.spacing_m,
        dt_min: cli.dt_min,
        threads: cli.threads,
    };
    let config = match RunConfig::load(&cli.config, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("stormgrid: [config] {e}");
            return ExitCode::from(2);
        }
    };

    let mut writer = match ArtifactWriter::new(&cli.out_dir) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("stormgrid: {e}");
            return ExitCode::from(2);
        }
    };

    let result: Result<(String, i32), PipelineError> = match cli.command {
        Command::SimulateWind => pipeline::run_simulate_wind(&config, &mut writer).map(|s| (s, 0)),
        Command::FailureRates => pipeline::run_failure_rates(&config, &mut writer).map(|s| (s, 0)),
        Command::Weights => pipeline::run_weights(&config, &mut writer).map(|s| (s, 0)),
        Command::Assess { strict } => pipeline::run_assess(&config, &mut writer, strict),
        Command::Strategies => pipeline::run_strategies(&config, &mut writer).map(|s| (s, 0)),
    };

    match result {
        Ok((summary, code)) => {
            println!("{summary}");
            for path in writer.paths() {
                println!("wrote {}", path.display());
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            writer.discard_all();
            eprintln!("stormgrid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
