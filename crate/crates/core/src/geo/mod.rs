//! Spatial substrate: points, distances, the population raster, the road
//! network and scenarios.

mod raster;
mod roads;
mod scenario;
mod synth;

pub use raster::PopulationRaster;
pub use roads::{Edge, RoadNetwork, ShortestPathTree};
pub use scenario::{FleetEntry, PortGroup, Scenario, StationSite, VehicleSpec};
pub use synth::{generate_synthetic, toy_dominant, Hotspot, SynthConfig};
#[cfg(test)]
pub(crate) use scenario::tests::minimal as test_scenario;

use alloc::string::String;
use serde::{Deserialize, Serialize};

use crate::math;

/// Mean Earth radius used by the haversine distance.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Tolerance used when deciding whether a point lies in a rectangle.
pub const CONTAINS_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point ({x}, {y}) lies outside the raster extent")]
    OutOfExtent { x: f64, y: f64 },
    #[error("no route between nodes {from} and {to}")]
    NoRoute { from: usize, to: usize },
    #[error("node index {0} out of range")]
    UnknownNode(usize),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("generation failed: {0}")]
    Generation(String),
}

impl GeoError {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        GeoError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A location in the scenario frame: kilometres east/north in planar mode,
/// longitude/latitude degrees in geographic mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Straight-line distance in frame units.
    pub fn euclidean(&self, other: &Point) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateMode {
    #[default]
    Planar,
    Geographic,
}

/// Distance in km between two points interpreted under `mode`.
///
/// Planar mode is Euclidean in the km frame. Geographic mode reads `x` as
/// longitude and `y` as latitude (degrees) and uses the haversine formula on
/// a sphere of radius [`EARTH_RADIUS_KM`]. The mode is a scenario-wide
/// property, so both points are always read under the same convention.
pub fn distance(a: Point, b: Point, mode: CoordinateMode) -> f64 {
    match mode {
        CoordinateMode::Planar => a.euclidean(&b),
        CoordinateMode::Geographic => haversine_km(a, b),
    }
}

fn haversine_km(a: Point, b: Point) -> f64 {
    let to_rad = core::f64::consts::PI / 180.0;
    let (lat1, lat2) = (a.y * to_rad, b.y * to_rad);
    let dlat = lat2 - lat1;
    let dlon = (b.x - a.x) * to_rad;
    let s1 = math::sin(dlat / 2.0);
    let s2 = math::sin(dlon / 2.0);
    let h = s1 * s1 + math::cos(lat1) * math::cos(lat2) * s2 * s2;
    2.0 * EARTH_RADIUS_KM * math::asin(math::sqrt(h.clamp(0.0, 1.0)))
}

/// The axis-aligned scenario rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Domain {
    pub const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Domain {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> Point {
        Point::new(
            (self.min_x + self.max_x) / 2.0,
            (self.min_y + self.max_y) / 2.0,
        )
    }

    pub fn is_valid(&self) -> bool {
        self.min_x.is_finite()
            && self.min_y.is_finite()
            && self.max_x.is_finite()
            && self.max_y.is_finite()
            && self.max_x > self.min_x
            && self.max_y > self.min_y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min_x - CONTAINS_TOL
            && p.x <= self.max_x + CONTAINS_TOL
            && p.y >= self.min_y - CONTAINS_TOL
            && p.y <= self.max_y + CONTAINS_TOL
    }

    /// Nearest point of the rectangle.
    pub fn clamp(&self, p: Point) -> Point {
        Point::new(
            p.x.clamp(self.min_x, self.max_x),
            p.y.clamp(self.min_y, self.max_y),
        )
    }

    /// Corners in counter-clockwise order starting at `(min_x, min_y)`.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.min_x, self.min_y),
            Point::new(self.max_x, self.min_y),
            Point::new(self.max_x, self.max_y),
            Point::new(self.min_x, self.max_y),
        ]
    }

    /// True when `p` lies on the boundary within `tol`.
    pub fn on_boundary(&self, p: Point, tol: f64) -> bool {
        self.contains(p)
            && (math::abs(p.x - self.min_x) <= tol
                || math::abs(p.x - self.max_x) <= tol
                || math::abs(p.y - self.min_y) <= tol
                || math::abs(p.y - self.max_y) <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_three_four_five() {
        let d = distance(
            Point::new(0.0, 0.0),
            Point::new(3.0, 4.0),
            CoordinateMode::Planar,
        );
        assert_eq!(d, 5.0);
    }

    #[test]
    fn identity_is_zero_in_both_modes() {
        let a = Point::new(105.8, 21.0);
        assert_eq!(distance(a, a, CoordinateMode::Planar), 0.0);
        assert_eq!(distance(a, a, CoordinateMode::Geographic), 0.0);
    }

    #[test]
    fn one_degree_of_longitude_on_the_equator() {
        // Hand calculation: h = sin^2(0.5 deg), d = 2 R asin(sqrt h) = R * pi / 180.
        let expected = EARTH_RADIUS_KM * core::f64::consts::PI / 180.0;
        let d = distance(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            CoordinateMode::Geographic,
        );
        assert!((d - expected).abs() < 1e-9, "{d} vs {expected}");
        assert!((d - 111.19).abs() < 0.01);
    }

    #[test]
    fn domain_corners_and_boundary() {
        let d = Domain::new(0.0, 0.0, 4.0, 2.0);
        assert_eq!(d.center(), Point::new(2.0, 1.0));
        assert!(d.on_boundary(Point::new(4.0, 1.0), 1e-9));
        assert!(!d.on_boundary(Point::new(2.0, 1.0), 1e-9));
        assert!(!d.contains(Point::new(4.1, 1.0)));
        assert_eq!(d.clamp(Point::new(9.0, -1.0)), Point::new(4.0, 0.0));
    }
}
