//! File formats: JSON documents and the fixed-column CSV exports.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use voltsite_core::dqn::TrainingHistory;
use voltsite_core::env::TraceRow;
use voltsite_core::geo::{Scenario, StationSite};
use voltsite_core::metrics::MetricsReport;
use voltsite_core::sim::Event;

use crate::error::{Error, Result};

/// A JSON parse failure located by its field path (`fleet[0].count`).
#[derive(Debug)]
pub struct JsonError {
    pub path: String,
    pub message: String,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

/// Reads a JSON document, reporting schema errors with the path of the
/// offending field.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Result<T, JsonError>> {
    let reader = open(path)?;
    let mut de = serde_json::Deserializer::from_reader(reader);
    Ok(serde_path_to_error::deserialize(&mut de).map_err(|e| JsonError {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    }))
}

/// Reads any JSON document whose schema errors count as validation errors.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    read_json(path)?.map_err(|e| Error::Validation {
        file: path.display().to_string(),
        message: format!("{}: {}", e.path, e.message),
    })
}

/// Parses and validates a scenario file; every failure names its field.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let mut scenario: Scenario = load_json(path)?;
    scenario.validate().map_err(|e| Error::Validation {
        file: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(scenario)
}

/// Pretty JSON with a trailing newline. Floats round-trip exactly.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::runtime)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct EventRow<'a> {
    tick: u32,
    vehicle_id: usize,
    event: &'static str,
    station_id: Option<&'a str>,
    soc: f64,
    wait_hours: f64,
}

/// Columns: tick, vehicle_id, event, station_id, soc, wait_hours.
pub fn write_events_csv(path: &Path, events: &[Event], stations: &[StationSite]) -> Result<()> {
    write_rows(
        path,
        events.iter().map(|e| EventRow {
            tick: e.tick,
            vehicle_id: e.vehicle,
            event: e.kind.as_str(),
            station_id: e.station.map(|i| stations[i].id.as_str()),
            soc: e.soc,
            wait_hours: e.wait_hours,
        }),
    )
}

/// Columns: step, candidate_x, candidate_y, port_type, r_pop, r_exist,
/// r_sub, r_wait, total, sim_mean_wait.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Serialize)]
struct HistoryRow {
    step: u64,
    episode: usize,
    loss_loc: Option<f64>,
    loss_port: Option<f64>,
    epsilon: f64,
    reward: f64,
}

/// Columns: step, episode, loss_loc, loss_port, epsilon, reward. One row per
/// environment step; losses are empty until the replay holds a batch.
pub fn write_history_csv(path: &Path, history: &TrainingHistory) -> Result<()> {
    write_rows(
        path,
        history.steps.iter().map(|s| HistoryRow {
            step: s.global_step,
            episode: s.episode,
            loss_loc: s.loss_loc,
            loss_port: s.loss_port,
            epsilon: s.epsilon,
            reward: s.reward,
        }),
    )
}

/// One row per station of the report.
pub fn write_station_csv(path: &Path, report: &MetricsReport) -> Result<()> {
    write_rows(path, &report.stations)
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    write_rows(path, rows)
}
