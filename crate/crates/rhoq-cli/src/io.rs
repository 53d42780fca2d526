//! File IO: loading tick or return-series CSVs and writing the output tables.
//!
//! Input format is auto-detected from the first header line: `timestamp,price`
//! marks tick data (resampled onto the configured grid), `t0,dt` marks an
//! already-sampled return series.

use std::fs;
use std::path::{Path, PathBuf};

use rhoq_core::ingest::{
    drop_break_returns, log_returns, parse_ticks, resample, ReturnSeries, SessionCalendar,
    TICK_CSV_HEADER,
};

use crate::config::RunConfig;
use crate::error::CliError;

/// Load one instrument file and bring it onto the analysis grid.
pub fn load_series(
    id: &str,
    path: &Path,
    cfg: &RunConfig,
    calendar: &SessionCalendar,
) -> Result<ReturnSeries, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let first_line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .trim()
        .to_string();
    let series = if first_line == TICK_CSV_HEADER || first_line.is_empty() {
        let ticks = parse_ticks(&text, id)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let grid = resample(&ticks, cfg.dt_s, calendar)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        log_returns(&grid).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
    } else if first_line == "t0,dt" {
        let series = ReturnSeries::from_csv(&text, id)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if series.dt_s() != cfg.dt_s {
            return Err(CliError::data(format!(
                "{}: series dt {} s does not match configured dt {} s",
                path.display(),
                series.dt_s(),
                cfg.dt_s
            )));
        }
        series
    } else {
        return Err(CliError::data(format!(
            "{}: unrecognized header `{first_line}` (expected `timestamp,price` or `t0,dt`)",
            path.display()
        )));
    };
    Ok(if cfg.drop_breaks {
        drop_break_returns(&series).0
    } else {
        series
    })
}

/// Load every configured instrument.
pub fn load_all(cfg: &RunConfig) -> Result<Vec<ReturnSeries>, CliError> {
    if cfg.instruments.is_empty() {
        return Err(CliError::config("no instruments configured"));
    }
    let calendar = cfg.calendar.build();
    cfg.instruments
        .iter()
        .map(|(id, path)| load_series(id, path, cfg, &calendar))
        .collect()
}

/// Trim a set of series to their common time grid.
pub fn align_all(series: Vec<ReturnSeries>) -> Result<Vec<ReturnSeries>, CliError> {
    if series.len() < 2 {
        return Ok(series);
    }
    let start = series.iter().map(|s| s.t0()).max().expect("non-empty");
    let end = series.iter().map(|s| s.end_ms()).min().expect("non-empty");
    if start >= end {
        return Err(CliError::data("series time spans do not overlap"));
    }
    let trimmed: Vec<ReturnSeries> = series
        .iter()
        .map(|s| {
            let ts = s.timestamps();
            let first = ts.partition_point(|&t| t < start);
            let last = ts.partition_point(|&t| t < end);
            s.slice(first..last)
        })
        .collect();
    let reference = trimmed[0].timestamps();
    for s in &trimmed[1..] {
        if s.timestamps() != reference {
            return Err(CliError::data(format!(
                "series `{}` does not share the common grid",
                s.instrument_id()
            )));
        }
    }
    if trimmed[0].is_empty() {
        return Err(CliError::data("series time spans do not overlap"));
    }
    Ok(trimmed)
}

/// Create the output directory and write a file into it.
pub fn write_output(out_dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    fs::write(&path, content)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Render a JSON value deterministically (serde_json preserves struct field
/// order, so identical runs yield identical bytes).
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::data(format!("cannot serialize JSON: {e}")))
}
