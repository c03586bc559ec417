use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{CoordinateMode, Domain, GeoError, Point, PopulationRaster, RoadNetwork};
use crate::ports::PortType;

/// `count` ports of one charger class at a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortGroup {
    #[serde(rename = "type")]
    pub port_type: PortType,
    pub count: u32,
}

/// A charging site as described in a scenario or a placement plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSite {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub ports: Vec<PortGroup>,
}

impl StationSite {
    pub fn new(id: impl Into<String>, location: Point, ports: Vec<PortGroup>) -> Self {
        StationSite {
            id: id.into(),
            x: location.x,
            y: location.y,
            ports,
        }
    }

    pub fn location(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn port_count(&self) -> u32 {
        self.ports.iter().map(|g| g.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub model: String,
    pub capacity_kwh: f64,
    pub consumption_kwh_per_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetEntry {
    pub model: String,
    pub capacity_kwh: f64,
    pub consumption_kwh_per_km: f64,
    pub count: u32,
}

impl FleetEntry {
    pub fn spec(&self) -> VehicleSpec {
        VehicleSpec {
            model: self.model.clone(),
            capacity_kwh: self.capacity_kwh,
            consumption_kwh_per_km: self.consumption_kwh_per_km,
        }
    }
}

/// The world a placement run operates on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub domain: Domain,
    pub raster: PopulationRaster,
    pub roads: RoadNetwork,
    pub buildings: Vec<Point>,
    pub substations: Vec<Point>,
    #[serde(rename = "stations")]
    pub existing_stations: Vec<StationSite>,
    pub fleet: Vec<FleetEntry>,
    #[serde(default)]
    pub coordinate_mode: CoordinateMode,
}

impl Scenario {
    /// Checks every invariant and refreshes derived caches (raster maximum,
    /// road adjacency). Errors name the offending field.
    pub fn validate(&mut self) -> Result<(), GeoError> {
        if !self.domain.is_valid() {
            return Err(GeoError::validation("domain", "min must be below max on both axes"));
        }
        self.raster.validate("raster")?;
        self.roads.validate(self.coordinate_mode, "roads")?;

        if self.buildings.len() < 2 {
            return Err(GeoError::validation("buildings", "at least 2 buildings are required"));
        }
        for (i, b) in self.buildings.iter().enumerate() {
            self.check_inside(*b, format!("buildings[{i}]"))?;
        }
        if self.substations.is_empty() {
            return Err(GeoError::validation("substations", "at least 1 substation is required"));
        }
        for (i, s) in self.substations.iter().enumerate() {
            self.check_inside(*s, format!("substations[{i}]"))?;
        }
        let mut ids = BTreeSet::new();
        for (i, s) in self.existing_stations.iter().enumerate() {
            if !ids.insert(s.id.as_str()) {
                return Err(GeoError::validation(
                    format!("stations[{i}].id"),
                    format!("duplicate station id {:?}", s.id),
                ));
            }
            if !self.domain.contains(s.location()) || !s.location().is_finite() {
                return Err(GeoError::validation(
                    format!("stations[{i}]"),
                    format!("station {:?} lies outside the domain", s.id),
                ));
            }
        }
        let mut total = 0u64;
        for (i, f) in self.fleet.iter().enumerate() {
            if !(f.capacity_kwh > 0.0 && f.capacity_kwh.is_finite()) {
                return Err(GeoError::validation(format!("fleet[{i}].capacity_kwh"), "must be positive"));
            }
            if !(f.consumption_kwh_per_km >= 0.0 && f.consumption_kwh_per_km.is_finite()) {
                return Err(GeoError::validation(
                    format!("fleet[{i}].consumption_kwh_per_km"),
                    "must be finite and >= 0",
                ));
            }
            total += f.count as u64;
        }
        if total == 0 {
            return Err(GeoError::validation("fleet", "fleet must contain at least one vehicle"));
        }
        if self.raster.rho_max() <= 0.0 {
            return Err(GeoError::validation("raster.cells", "raster has no positive density"));
        }
        Ok(())
    }

    fn check_inside(&self, p: Point, path: String) -> Result<(), GeoError> {
        if !p.is_finite() || !self.domain.contains(p) {
            return Err(GeoError::validation(path, "lies outside the domain"));
        }
        Ok(())
    }

    pub fn fleet_size(&self) -> usize {
        self.fleet.iter().map(|f| f.count as usize).sum()
    }

    pub fn station_points(&self) -> Vec<Point> {
        self.existing_stations.iter().map(StationSite::location).collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geo::Edge;
    use alloc::vec;

    pub(crate) fn minimal() -> Scenario {
        Scenario {
            domain: Domain::new(0.0, 0.0, 2.0, 2.0),
            raster: PopulationRaster::uniform(Point::new(0.0, 0.0), 1.0, 2, 2, 100.0),
            roads: RoadNetwork::new(
                vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(2.0, 2.0)],
                vec![Edge { a: 0, b: 1, length: 2.0 }, Edge { a: 1, b: 2, length: 2.0 }],
            ),
            buildings: vec![Point::new(0.0, 0.0), Point::new(2.0, 2.0)],
            substations: vec![Point::new(1.0, 1.0)],
            existing_stations: vec![StationSite::new(
                "s1",
                Point::new(2.0, 0.0),
                vec![PortGroup { port_type: PortType::new(5).unwrap(), count: 2 }],
            )],
            fleet: vec![FleetEntry {
                model: "VFe34".into(),
                capacity_kwh: 42.0,
                consumption_kwh_per_km: 0.15,
                count: 1,
            }],
            coordinate_mode: CoordinateMode::Planar,
        }
    }

    #[test]
    fn minimal_scenario_validates() {
        let mut s = minimal();
        s.validate().unwrap();
        assert_eq!(s.raster.rho_max(), 100.0);
    }

    #[test]
    fn station_outside_domain_names_the_station() {
        let mut s = minimal();
        s.existing_stations[0].x = 5.0;
        let err = s.validate().unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("stations[0]") && msg.contains("s1"), "{msg}");
    }

    #[test]
    fn other_invariants() {
        let mut s = minimal();
        s.raster.cells[3] = -1.0;
        assert!(s.validate().is_err());

        let mut s = minimal();
        s.buildings.truncate(1);
        assert!(s.validate().is_err());

        let mut s = minimal();
        s.substations.clear();
        assert!(s.validate().is_err());

        let mut s = minimal();
        s.fleet[0].count = 0;
        assert!(s.validate().is_err());
    }
}
