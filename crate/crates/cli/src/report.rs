//! CSV metrics and event-log emission.
//!
//! Rows are schema-stable (fixed column order, header always emitted) and
//! locale-independent (dot decimal separator). The runtime column reports
//! the simulated window in milliseconds, a deterministic figure, so that
//! repeated runs of the same scenario produce byte-identical rows.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use railguard_core::sim::{Mode, SimConfig, SimReport};

pub const CSV_HEADER: &str = "trains,mode,detected,avoided,occurred,efficiency_pct,messages,runtime_ms";

/// Simulated wall time of the run, in whole milliseconds.
pub fn simulated_ms(config: &SimConfig) -> u64 {
    (config.horizon as f64 * config.tick_seconds * 1000.0).round() as u64
}

pub fn csv_row(report: &SimReport, mode: Mode, runtime_ms: u64) -> String {
    format!(
        "{},{},{},{},{},{:.1},{},{}",
        report.trains,
        mode.label(),
        report.detected,
        report.avoided,
        report.occurred,
        report.efficiency_pct(),
        report.messages_total,
        runtime_ms
    )
}

/// Writes `report.csv` (header + one row) and `events.log` under `dir`.
pub fn write_run_outputs(
    dir: &Path,
    report: &SimReport,
    config: &SimConfig,
) -> io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("report.csv");
    let mut csv = String::with_capacity(128);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    csv.push_str(&csv_row(report, config.mode, simulated_ms(config)));
    csv.push('\n');
    fs::write(&csv_path, csv)?;
    let log_path = dir.join("events.log");
    fs::write(&log_path, report.event_log())?;
    Ok((csv_path, log_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row_schema_are_stable() {
        assert_eq!(
            CSV_HEADER,
            "trains,mode,detected,avoided,occurred,efficiency_pct,messages,runtime_ms"
        );
        let cfg = SimConfig { horizon: 300, tick_seconds: 0.5, ..SimConfig::default() };
        assert_eq!(simulated_ms(&cfg), 150_000);
    }
}
