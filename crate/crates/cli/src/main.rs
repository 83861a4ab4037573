//! Command-line entry point: validate scenarios, run single scenarios, and
//! run train-count sweeps that emit plot-ready CSV metrics.
//!
//! Exit codes: 0 on a clean run (collisions are results, not tool
//! failures), 2 on scenario validation or parse failure, 1 on IO errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};

use railguard_cli::report::{csv_row, simulated_ms, write_run_outputs, CSV_HEADER};
use railguard_cli::scenario::{load_scenario, parse_mode};
use railguard_cli::sweep::{parse_counts, run_sweep, sweep_csv, SweepSpec};
use railguard_core::sim::{run_scenario, Mode};

#[derive(Parser)]
#[command(
    name = "railguard",
    about = "Deterministic railway collision detection and max-sum resolution simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario file.
    Validate { file: PathBuf },
    /// Run one scenario and write report.csv and events.log.
    Run {
        file: PathBuf,
        /// Override the scenario's coordination mode.
        #[arg(long, value_parser = mode_arg)]
        mode: Option<Mode>,
        /// Output directory for report.csv and events.log.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Print the event log to stdout as well.
        #[arg(long)]
        print_events: bool,
    },
    /// Seed trains onto the scenario's network and sweep over train counts.
    Sweep {
        file: PathBuf,
        /// Counts as a..b[:step] or a single number, e.g. 2..30:2.
        #[arg(long)]
        trains: String,
        /// Comma-separated modes to compare.
        #[arg(long, default_value = "distributed,centralized")]
        modes: String,
        /// Worker threads for sweep points.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Generation seed; the same seed reproduces the same trains.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for sweep.csv.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

fn mode_arg(s: &str) -> Result<Mode, String> {
    parse_mode(s)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("RAILGUARD_LOG", "warn"),
    )
    .format_timestamp(None)
    .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            error!("{err}");
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Validate { file } => match load_scenario(&file) {
            Ok(sc) => {
                println!(
                    "OK: {} ({} stations, {} junctions, {} tracks, {} trains, horizon {} ticks)",
                    sc.name,
                    sc.network.station_count(),
                    sc.network.junction_count(),
                    sc.network.tracks().len(),
                    sc.trains.len(),
                    sc.config.horizon
                );
                Ok(ExitCode::SUCCESS)
            }
            Err(err) => {
                eprintln!("invalid scenario: {err}");
                Ok(ExitCode::from(2))
            }
        },
        Command::Run { file, mode, out, print_events } => {
            let mut sc = match load_scenario(&file) {
                Ok(sc) => sc,
                Err(err) => {
                    eprintln!("invalid scenario: {err}");
                    return Ok(ExitCode::from(2));
                }
            };
            if let Some(m) = mode {
                sc.config.mode = m;
            }
            info!("running `{}` in {} mode", sc.name, sc.config.mode.label());
            let report = run_scenario(&sc);
            let (csv_path, log_path) = write_run_outputs(&out, &report, &sc.config)?;
            if print_events {
                print!("{}", report.event_log());
            }
            println!("{CSV_HEADER}");
            println!("{}", csv_row(&report, sc.config.mode, simulated_ms(&sc.config)));
            println!(
                "detected={} avoided={} occurred={} efficiency={:.1}% messages={} -> {} / {}",
                report.detected,
                report.avoided,
                report.occurred,
                report.efficiency_pct(),
                report.messages_total,
                csv_path.display(),
                log_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { file, trains, modes, jobs, seed, out } => {
            let base = match load_scenario(&file) {
                Ok(sc) => sc,
                Err(err) => {
                    eprintln!("invalid scenario: {err}");
                    return Ok(ExitCode::from(2));
                }
            };
            let counts = match parse_counts(&trains) {
                Ok(c) => c,
                Err(err) => {
                    eprintln!("invalid sweep: {err}");
                    return Ok(ExitCode::from(2));
                }
            };
            let mut mode_list = Vec::new();
            for m in modes.split(',') {
                match parse_mode(m.trim()) {
                    Ok(m) => mode_list.push(m),
                    Err(err) => {
                        eprintln!("invalid sweep: {err}");
                        return Ok(ExitCode::from(2));
                    }
                }
            }
            let spec = SweepSpec { counts, modes: mode_list, seed, jobs };
            let rows = match run_sweep(&base, &spec) {
                Ok(rows) => rows,
                Err(err) => {
                    eprintln!("invalid sweep: {err}");
                    return Ok(ExitCode::from(2));
                }
            };
            let csv = sweep_csv(&rows);
            std::fs::create_dir_all(&out)?;
            let path = out.join("sweep.csv");
            std::fs::write(&path, &csv)?;
            print!("{csv}");
            info!("sweep written to {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
