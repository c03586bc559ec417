use alloc::vec::Vec;
use rand::Rng;

use super::{SimError, SimulationConfig};
use crate::geo::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Driving,
    Seeking,
    Queued,
    Charging,
    Idle,
    Stranded,
}

/// A route being travelled: a polyline whose segment lengths are road km.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Leg {
    pub points: Vec<Point>,
    /// Road node at each point, `None` for off-road endpoints.
    pub nodes: Vec<Option<usize>>,
    pub lengths: Vec<f64>,
    pub seg: usize,
    pub offset: f64,
}

impl Leg {
    pub fn is_done(&self) -> bool {
        self.seg >= self.lengths.len()
    }

    pub fn position(&self) -> Point {
        if self.is_done() {
            return *self.points.last().expect("leg has points");
        }
        let len = self.lengths[self.seg];
        let t = if len > 0.0 { (self.offset / len).clamp(0.0, 1.0) } else { 0.0 };
        self.points[self.seg].lerp(&self.points[self.seg + 1], t)
    }

    pub fn remaining_km(&self) -> f64 {
        if self.is_done() {
            return 0.0;
        }
        self.lengths[self.seg..].iter().sum::<f64>() - self.offset
    }

    /// Advances by up to `km`, returning the distance actually covered.
    pub fn advance(&mut self, mut km: f64) -> f64 {
        let mut covered = 0.0;
        while km > 0.0 && !self.is_done() {
            let left = self.lengths[self.seg] - self.offset;
            if km >= left {
                km -= left;
                covered += left;
                self.seg += 1;
                self.offset = 0.0;
            } else {
                self.offset += km;
                covered += km;
                km = 0.0;
            }
        }
        // Zero-length trailing segments complete immediately.
        while !self.is_done() && self.lengths[self.seg] - self.offset <= 0.0 {
            self.seg += 1;
            self.offset = 0.0;
        }
        covered
    }

    /// Nearest road node reachable along the current segment and the road
    /// distance to it.
    pub fn node_ahead(&self) -> Option<(usize, f64)> {
        if self.is_done() {
            return self.nodes.last().copied().flatten().map(|n| (n, 0.0));
        }
        if let Some(n) = self.nodes[self.seg + 1] {
            Some((n, self.lengths[self.seg] - self.offset))
        } else {
            self.nodes[self.seg].map(|n| (n, self.offset))
        }
    }
}

/// Per-vehicle state tracked by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: usize,
    pub fleet_index: usize,
    pub capacity_kwh: f64,
    pub consumption_kwh_per_km: f64,
    pub soc: f64,
    pub speed_kmh: f64,
    pub mode: Mode,
    pub position: Point,
    /// Building the vehicle is heading to (or parked at).
    pub destination: usize,
    /// Set when the vehicle passed on charging at the consider threshold.
    pub declined_30: bool,
    /// The consider-threshold decision has been taken this discharge cycle.
    pub considered: bool,
    /// Hours spent in the current queue.
    pub wait_clock: f64,
    pub km_driven: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeDecision {
    StartSeeking,
    KeepDriving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Stop,
    ContinueToFull,
}

/// Charging behaviour of a driving vehicle for the current tick.
///
/// At or below the forced threshold the vehicle always seeks a charger. The
/// first time the state of charge is at or below the consider threshold the
/// driver flips a coin with `p_charge_at_30`; a driver who declines keeps
/// driving until the forced threshold.
pub fn decide_charging<R: Rng + ?Sized>(
    v: &mut VehicleState,
    config: &SimulationConfig,
    rng: &mut R,
) -> ChargeDecision {
    if v.soc <= config.soc_forced_threshold {
        return ChargeDecision::StartSeeking;
    }
    if v.soc <= config.soc_consider_threshold && !v.considered {
        v.considered = true;
        if rng.gen_bool(config.p_charge_at_30) {
            return ChargeDecision::StartSeeking;
        }
        v.declined_30 = true;
    }
    ChargeDecision::KeepDriving
}

/// Taken once when a charging vehicle reaches the stop threshold.
pub fn stop_decision<R: Rng + ?Sized>(config: &SimulationConfig, rng: &mut R) -> StopDecision {
    if rng.gen_bool(config.p_stop_at_80) {
        StopDecision::Stop
    } else {
        StopDecision::ContinueToFull
    }
}

/// Hours to charge from `soc_from` to `soc_to` at constant `power_kw`
/// (linear model, no taper, lossless).
pub fn charging_duration(
    capacity_kwh: f64,
    soc_from: f64,
    soc_to: f64,
    power_kw: f64,
) -> Result<f64, SimError> {
    if !(0.0..=1.0).contains(&soc_from) || !(0.0..=1.0).contains(&soc_to) || soc_to <= soc_from {
        return Err(SimError::InvalidArgument("need 0 <= soc_from < soc_to <= 1"));
    }
    if !(power_kw > 0.0) || !(capacity_kwh > 0.0) {
        return Err(SimError::InvalidArgument("capacity and power must be positive"));
    }
    Ok(capacity_kwh * (soc_to - soc_from) / power_kw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use alloc::vec;

    fn vehicle(soc: f64) -> VehicleState {
        VehicleState {
            id: 0,
            fleet_index: 0,
            capacity_kwh: 42.0,
            consumption_kwh_per_km: 0.15,
            soc,
            speed_kmh: 45.0,
            mode: Mode::Driving,
            position: Point::default(),
            destination: 0,
            declined_30: false,
            considered: false,
            wait_clock: 0.0,
            km_driven: 0.0,
        }
    }

    #[test]
    fn forced_branch_ignores_rng() {
        let cfg = SimulationConfig { p_charge_at_30: 0.0, ..Default::default() };
        let mut rng = stream(1, Stream::Decisions);
        for _ in 0..100 {
            assert_eq!(decide_charging(&mut vehicle(0.08), &cfg, &mut rng), ChargeDecision::StartSeeking);
        }
    }

    #[test]
    fn certain_charge_at_crossing() {
        let cfg = SimulationConfig { p_charge_at_30: 1.0, ..Default::default() };
        let mut rng = stream(1, Stream::Decisions);
        assert_eq!(decide_charging(&mut vehicle(0.30), &cfg, &mut rng), ChargeDecision::StartSeeking);
    }

    #[test]
    fn never_charge_until_forced() {
        let cfg = SimulationConfig { p_charge_at_30: 0.0, ..Default::default() };
        let mut rng = stream(1, Stream::Decisions);
        let mut v = vehicle(0.31);
        let mut soc = 0.31;
        while soc > 0.1 + 1e-12 {
            v.soc = soc;
            assert_eq!(decide_charging(&mut v, &cfg, &mut rng), ChargeDecision::KeepDriving);
            soc -= 0.01;
        }
        assert!(v.declined_30);
        v.soc = 0.1;
        assert_eq!(decide_charging(&mut v, &cfg, &mut rng), ChargeDecision::StartSeeking);
    }

    #[test]
    fn stop_decision_degenerate_probabilities() {
        let mut rng = stream(2, Stream::Decisions);
        let stop = SimulationConfig { p_stop_at_80: 1.0, ..Default::default() };
        let go = SimulationConfig { p_stop_at_80: 0.0, ..Default::default() };
        for _ in 0..50 {
            assert_eq!(stop_decision(&stop, &mut rng), StopDecision::Stop);
            assert_eq!(stop_decision(&go, &mut rng), StopDecision::ContinueToFull);
        }
    }

    #[test]
    fn charging_duration_hand_cases() {
        // 42 * 0.5 / 60 = 0.35
        assert_eq!(charging_duration(42.0, 0.30, 0.80, 60.0).unwrap(), 0.35);
        assert_eq!(charging_duration(123.0, 0.0, 1.0, 123.0).unwrap(), 1.0);
        let tiny = charging_duration(87.7, 0.5 - 1e-12, 0.5, 22.0).unwrap();
        assert!(tiny >= 0.0 && tiny < 1e-10);
        assert!(charging_duration(42.0, 0.8, 0.8, 60.0).is_err());
        assert!(charging_duration(42.0, 0.8, 0.3, 60.0).is_err());
    }

    #[test]
    fn session_energy_for_stop_at_eighty() {
        // delivered = capacity * delta soc = 42 * 0.5
        let hours = charging_duration(42.0, 0.30, 0.80, 60.0).unwrap();
        assert!((hours * 60.0 - 21.0).abs() < 1e-12);
    }

    #[test]
    fn leg_advance_truncates_at_end() {
        let mut leg = Leg {
            points: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 2.0)],
            nodes: vec![None, Some(0), None],
            lengths: vec![1.0, 2.0],
            seg: 0,
            offset: 0.0,
        };
        assert_eq!(leg.advance(0.5), 0.5);
        assert_eq!(leg.position(), Point::new(0.5, 0.0));
        assert_eq!(leg.node_ahead(), Some((0, 0.5)));
        assert_eq!(leg.advance(10.0), 2.5);
        assert!(leg.is_done());
        assert_eq!(leg.position(), Point::new(1.0, 2.0));
    }
}
