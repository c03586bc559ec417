use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::ports::PortType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TripStart,
    TripEnd,
    SeekStart,
    Enqueue,
    Reject,
    ChargeStart,
    ContinueToFull,
    ChargeEnd,
    Stranded,
    /// Still queued when the horizon ended; the wait so far is reported.
    Censored,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TripStart => "trip_start",
            EventKind::TripEnd => "trip_end",
            EventKind::SeekStart => "seek_start",
            EventKind::Enqueue => "enqueue",
            EventKind::Reject => "reject",
            EventKind::ChargeStart => "charge_start",
            EventKind::ContinueToFull => "continue_to_full",
            EventKind::ChargeEnd => "charge_end",
            EventKind::Stranded => "stranded",
            EventKind::Censored => "censored",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u32,
    pub vehicle: usize,
    pub kind: EventKind,
    pub station: Option<usize>,
    pub soc: f64,
    pub wait_hours: f64,
}

/// One waiting episode: queue arrival to charging start (zero when a port
/// was free on arrival).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaitRecord {
    pub vehicle: usize,
    pub station: usize,
    pub wait_hours: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub vehicle: usize,
    pub station: usize,
    pub port_type: PortType,
    pub power_kw: f64,
    pub capacity_kwh: f64,
    pub soc_start: f64,
    pub soc_end: f64,
    pub energy_kwh: f64,
    pub hours: f64,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationStats {
    pub id: String,
    pub mean_wait_h: f64,
    pub arrivals: u32,
    pub sessions_started: u32,
    pub completed_sessions: u32,
    pub rejections: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub ticks: u32,
    pub tick_hours: f64,
    pub waits: Vec<WaitRecord>,
    pub sessions: Vec<SessionRecord>,
    pub stations: Vec<StationStats>,
    /// Vehicle-hours spent plugged in, including sessions cut by the horizon.
    pub total_charging_hours: f64,
    /// Mean over all waiting episodes, 0 when there were none.
    pub system_mean_wait_h: f64,
    pub stranded: usize,
    pub events: Vec<Event>,
}

impl SimulationResult {
    pub fn station_mean_waits(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.mean_wait_h).collect()
    }
}
