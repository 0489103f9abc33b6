//! Thin CLI over the experiment harness: `design`, `sweep`, `beampattern`,
//! and `convergence` subcommands.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use dfrc::harness::{
    cmd_beampattern, cmd_convergence, cmd_design, cmd_sweep, exit_code_for, ExperimentConfig,
    SweepAxis,
};
use dfrc::{Error, Structure};

#[derive(Parser)]
#[command(
    name = "dfrc",
    version,
    about = "Hybrid beamformer design for a dual-function radar-communication transmitter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design one hybrid beamformer and write beamformer.json + report.json.
    Design {
        /// Scenario config JSON (defaults apply when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trade-off weight in [0, 1]; 1 is communication-only.
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        /// Analog network layout: full | partial.
        #[arg(long, default_value = "full", value_parser = parse_structure)]
        structure: Structure,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Include a feasibility report in report.json.
        #[arg(long)]
        check: bool,
        /// Record wall-clock timings (makes outputs non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Sweep a grid axis and write one CSV row per evaluated cell.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweep axis: phi | snr | nrf.
        #[arg(long, default_value = "phi", value_parser = parse_axis)]
        axis: SweepAxis,
        /// Output CSV path.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Worker threads; the output bytes do not depend on this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        timings: bool,
    },
    /// Evaluate a stored beamformer's transmit pattern over [-90, 90] degrees.
    Beampattern {
        /// beamformer.json produced by `design`.
        #[arg(long)]
        beamformer: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        resolution_deg: f64,
        #[arg(long, default_value = "beampattern.csv")]
        out: PathBuf,
    },
    /// Export per-iteration solver traces for one design run.
    Convergence {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        #[arg(long, default_value = "full", value_parser = parse_structure)]
        structure: Structure,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "convergence.csv")]
        out: PathBuf,
    },
}

fn parse_structure(s: &str) -> Result<Structure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(path: &Option<PathBuf>, axis: Option<SweepAxis>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::from_json_file(p, axis),
        None => dfrc::harness::ConfigFile::default().resolve(axis),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Design {
            config,
            phi,
            structure,
            seed,
            out,
            check,
            timings,
        } => {
            let cfg = load_config(&config, None)?;
            cmd_design(&cfg, phi, structure, seed, &out, check, timings)?;
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            out,
            jobs,
            timings,
        } => {
            let cfg = load_config(&config, Some(axis))?;
            cmd_sweep(&cfg, axis, &out, jobs, timings)
        }
        Command::Beampattern {
            beamformer,
            resolution_deg,
            out,
        } => cmd_beampattern(&beamformer, resolution_deg, &out),
        Command::Convergence {
            config,
            phi,
            structure,
            seed,
            out,
        } => {
            let cfg = load_config(&config, None)?;
            cmd_convergence(&cfg, phi, structure, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            let code = exit_code_for(&error);
            let kind = match code {
                2 => "config",
                4 => "io",
                _ => "solver",
            };
            eprintln!(
                "{}",
                serde_json::json!({ "error": error.to_string(), "kind": kind, "exit_code": code })
            );
            ExitCode::from(code as u8)
        }
    }
}
