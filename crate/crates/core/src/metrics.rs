//! Evaluation metrics over simulation results and station sets.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::geo::{distance, CoordinateMode, Point, StationSite};
use crate::ports::PortCatalog;
use crate::sim::SimulationResult;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no charging sessions occurred; mean wait is undefined")]
    NoData,
    #[error("baseline wait must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("{0} must not be empty")]
    Empty(&'static str),
}

/// Mean over all waiting episodes, zero-wait ones included.
pub fn mean_wait(result: &SimulationResult) -> Result<f64, MetricsError> {
    mean_of(result.waits.iter().map(|w| w.wait_hours))
}

fn mean_of(values: impl Iterator<Item = f64>) -> Result<f64, MetricsError> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return Err(MetricsError::NoData);
    }
    Ok(sum / n as f64)
}

/// Relative reduction in percent: `100 (baseline - wait) / baseline`.
pub fn gap(wait_baseline: f64, wait: f64) -> Result<f64, MetricsError> {
    if !(wait_baseline > 0.0) {
        return Err(MetricsError::NonPositiveBaseline(wait_baseline));
    }
    Ok(100.0 * (wait_baseline - wait) / wait_baseline)
}

/// Mean distance from each new station to the nearest station that existed
/// when it was placed (the initial set plus earlier new stations).
pub fn mean_proximity(new: &[Point], existing: &[Point], mode: CoordinateMode) -> Result<f64, MetricsError> {
    if new.is_empty() {
        return Err(MetricsError::Empty("new station list"));
    }
    if existing.is_empty() {
        return Err(MetricsError::Empty("existing station list"));
    }
    let mut placed: Vec<Point> = existing.to_vec();
    let mut total = 0.0;
    for p in new {
        total += placed.iter().map(|q| distance(*p, *q, mode)).fold(f64::INFINITY, f64::min);
        placed.push(*p);
    }
    Ok(total / new.len() as f64)
}

/// Mean over stations of `sum_j count_j * s_j`.
pub fn cssi(stations: &[StationSite], catalog: &PortCatalog) -> Result<f64, MetricsError> {
    if stations.is_empty() {
        return Err(MetricsError::Empty("station list"));
    }
    let total: f64 = stations
        .iter()
        .flat_map(|s| &s.ports)
        .map(|g| f64::from(g.count) * catalog.scale(g.port_type))
        .sum();
    Ok(total / stations.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationWaitRow {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub ports: u32,
    pub mean_wait_h: f64,
    pub arrivals: u32,
    pub rejections: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub seed: u64,
    /// `None` when no charging session happened.
    pub wait_h: Option<f64>,
    pub baseline_wait_h: Option<f64>,
    pub gap_percent: Option<f64>,
    pub total_charging_h: f64,
    /// `None` when the plan adds no stations.
    pub mean_proximity_km: Option<f64>,
    pub cssi: f64,
    pub stranded: usize,
    pub stations: Vec<StationWaitRow>,
}

/// Summarizes one simulated station set. `initial` and `added` split the
/// station list the simulation ran on, in that order.
pub fn build_report(
    method: &str,
    seed: u64,
    initial: &[StationSite],
    added: &[StationSite],
    result: &SimulationResult,
    baseline_wait_h: Option<f64>,
    mode: CoordinateMode,
) -> Result<MetricsReport, MetricsError> {
    let mut all = initial.to_vec();
    all.extend(added.iter().cloned());
    let wait = match mean_wait(result) {
        Ok(w) => Some(w),
        Err(MetricsError::NoData) => None,
        Err(e) => return Err(e),
    };
    let gap_percent = match (baseline_wait_h, wait) {
        (Some(b), Some(w)) if b > 0.0 => Some(gap(b, w)?),
        _ => None,
    };
    let new_points: Vec<Point> = added.iter().map(StationSite::location).collect();
    let old_points: Vec<Point> = initial.iter().map(StationSite::location).collect();
    let mean_proximity_km =
        if new_points.is_empty() || old_points.is_empty() { None } else { Some(mean_proximity(&new_points, &old_points, mode)?) };
    let stations = all
        .iter()
        .zip(&result.stations)
        .map(|(site, st)| StationWaitRow {
            id: site.id.clone(),
            x: site.x,
            y: site.y,
            ports: site.port_count(),
            mean_wait_h: st.mean_wait_h,
            arrivals: st.arrivals,
            rejections: st.rejections,
        })
        .collect();
    Ok(MetricsReport {
        method: method.into(),
        seed,
        wait_h: wait,
        baseline_wait_h,
        gap_percent,
        total_charging_h: result.total_charging_hours,
        mean_proximity_km,
        cssi: cssi(&all, &PortCatalog::default())?,
        stranded: result.stranded,
        stations,
    })
}

/// Median of a non-empty sample (mean of the middle two for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{generate_synthetic, PortGroup, SynthConfig};
    use crate::ports::PortType;
    use crate::sim::{run, EventKind, SimulationConfig, WaitRecord};
    use alloc::vec;

    fn result_with_waits(waits: &[f64]) -> SimulationResult {
        SimulationResult {
            ticks: 0,
            tick_hours: 1.0 / 60.0,
            waits: waits
                .iter()
                .map(|w| WaitRecord { vehicle: 0, station: 0, wait_hours: *w, censored: false })
                .collect(),
            sessions: Vec::new(),
            stations: Vec::new(),
            total_charging_hours: 0.0,
            system_mean_wait_h: 0.0,
            stranded: 0,
            events: Vec::new(),
        }
    }

    #[test]
    fn mean_wait_cases() {
        assert_eq!(mean_wait(&result_with_waits(&[0.0, 0.0, 0.0])), Ok(0.0));
        assert_eq!(mean_wait(&result_with_waits(&[1.0, 2.0])), Ok(1.5));
        assert_eq!(mean_wait(&result_with_waits(&[])), Err(MetricsError::NoData));
    }

    #[test]
    fn gap_cases() {
        assert!((gap(1.7360, 1.2037).unwrap() - 30.66).abs() < 0.01);
        assert!((gap(1.7360, 0.9774).unwrap() - 43.70).abs() < 0.01);
        assert!((gap(1.7360, 0.9343).unwrap() - 46.18).abs() < 0.01);
        assert_eq!(gap(2.5, 2.5).unwrap(), 0.0);
        assert_eq!(gap(2.5, 0.0).unwrap(), 100.0);
        assert!(gap(0.0, 1.0).is_err());
    }

    #[test]
    fn proximity_is_sequential() {
        let m = CoordinateMode::Planar;
        let o = Point::new(0.0, 0.0);
        assert_eq!(mean_proximity(&[Point::new(0.5, 0.0)], &[o], m), Ok(0.5));
        assert_eq!(mean_proximity(&[o], &[o], m), Ok(0.0));
        // New stations at (3,0), (3,4), (6,0) against (0,0): 3, then 4 to
        // (3,0), then 3 to (3,0).
        let new = [Point::new(3.0, 0.0), Point::new(3.0, 4.0), Point::new(6.0, 0.0)];
        assert!((mean_proximity(&new, &[o], m).unwrap() - 10.0 / 3.0).abs() < 1e-12);
        assert!(mean_proximity(&[], &[o], m).is_err());
        assert!(mean_proximity(&new, &[], m).is_err());
    }

    fn site(j: u8, count: u32) -> StationSite {
        StationSite::new("s", Point::new(0.0, 0.0), vec![PortGroup { port_type: PortType::new(j).unwrap(), count }])
    }

    #[test]
    fn cssi_cases() {
        let c = PortCatalog::default();
        assert!((cssi(&[site(10, 1)], &c).unwrap() - 1.0).abs() < 1e-15);
        assert!((cssi(&[site(1, 2)], &c).unwrap() - 0.2).abs() < 1e-15);
        let set = [site(3, 2), site(7, 1)];
        let doubled = [site(3, 2), site(7, 1), site(3, 2), site(7, 1)];
        assert!((cssi(&set, &c).unwrap() - cssi(&doubled, &c).unwrap()).abs() < 1e-12);
        let scaled = [site(3, 4), site(7, 2)];
        assert!((cssi(&scaled, &c).unwrap() - 2.0 * cssi(&set, &c).unwrap()).abs() < 1e-12);
        assert!(cssi(&[], &c).is_err());
    }

    #[test]
    fn mean_wait_matches_event_log() {
        let s = generate_synthetic(&SynthConfig::desk(), 8).unwrap();
        let cfg = SimulationConfig { record_events: true, ..Default::default() };
        let r = run(&s, &s.existing_stations, &cfg, 4).unwrap();
        let from_log: Vec<f64> = r
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::ChargeStart | EventKind::Censored))
            .map(|e| e.wait_hours)
            .collect();
        let brute = from_log.iter().sum::<f64>() / from_log.len() as f64;
        assert!((mean_wait(&r).unwrap() - brute).abs() < 1e-12);
        assert!((r.system_mean_wait_h - brute).abs() < 1e-12);
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
