use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delaylight_cli::config::{parse_document, Scenario};
use delaylight_cli::{presets, run, validate_config, ConfigError, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "delaylight", version, about = "Delayed-light generation simulator")]
struct Cli {
    /// JSON scenario configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output_dir` or `out/<scenario>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scenario to run when no subcommand is given.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Probe and signal power spectra with line fits.
    Spectrum,
    /// Probe and signal contrast over the drive sweep.
    Contrast,
    /// Probe and signal group delays over the drive sweep.
    Delay,
    /// Gaussian pulse through both channels.
    Pulse,
    /// Beam diffusion sweep and width fits.
    Beam,
    /// Power and S*eta_act calibration from synthetic spectra.
    Calibrate,
    /// Built-in figure scenario.
    Reproduce {
        #[arg(value_parser = ["fig2a", "fig2b", "fig3a", "fig3b", "fig4"])]
        figure: String,
    },
}

fn config_error(e: &ConfigError) -> ExitCode {
    eprint!("{e}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let selected = match (&cli.command, &cli.scenario) {
        (Some(Command::Spectrum), _) => Some(Scenario::Spectrum),
        (Some(Command::Contrast), _) => Some(Scenario::Contrast),
        (Some(Command::Delay), _) => Some(Scenario::Delay),
        (Some(Command::Pulse), _) => Some(Scenario::Pulse),
        (Some(Command::Beam), _) => Some(Scenario::Beam),
        (Some(Command::Calibrate), _) => Some(Scenario::Calibrate),
        (Some(Command::Reproduce { figure }), _) => Scenario::parse(figure),
        (None, Some(name)) => match Scenario::parse(name) {
            Some(s) => Some(s),
            None => {
                return config_error(&ConfigError::single(
                    "--scenario",
                    format!("unknown scenario {name:?}; expected one of {:?}", Scenario::NAMES),
                ))
            }
        },
        (None, None) => None,
    };

    let (raw, base_dir) = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return config_error(&ConfigError::single("--config", format!("cannot read {}: {e}", path.display()))),
            };
            match parse_document(&text) {
                Ok(raw) => (raw, path.parent().map(PathBuf::from)),
                Err(e) => return config_error(&e),
            }
        }
        None => match selected.and_then(presets::preset) {
            Some(raw) => (raw, None),
            None => {
                return config_error(&ConfigError::single(
                    "--config",
                    "required unless running a built-in figure scenario",
                ))
            }
        },
    };

    let cfg = match validate_config(&raw, selected, base_dir.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return config_error(&e),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.scenario.name()));

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => return config_error(&ConfigError::single("--threads", e.to_string())),
    };
    match pool.install(|| run(&cfg, out)) {
        Ok(summary) => {
            println!("{}", summary.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                RunError::Numerical(_) => EXIT_NUMERICAL,
                RunError::Io(_) => EXIT_IO,
            })
        }
    }
}
