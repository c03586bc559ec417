use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    CoordinateMode, Domain, Edge, FleetEntry, GeoError, Point, PopulationRaster, PortGroup,
    RoadNetwork, Scenario, StationSite,
};
use crate::math;
use crate::ports::{PortCatalog, PortType};
use crate::rng::{sample_weighted, stream, Stream};

/// A Gaussian density bump. Position is given as a fraction of the domain
/// extent so the same hotspot layout scales with the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hotspot {
    pub x_frac: f64,
    pub y_frac: f64,
    pub sigma_km: f64,
    /// Peak density added at the centre, people/km².
    pub weight: f64,
}

/// Parameters for the synthetic scenario generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub width_km: f64,
    pub height_km: f64,
    pub cell_size_km: f64,
    pub grid_roads_x: usize,
    pub grid_roads_y: usize,
    pub base_density: f64,
    pub hotspots: Vec<Hotspot>,
    pub n_buildings: usize,
    /// Substations sit at the centres of a `lattice x lattice` partition.
    pub substation_lattice: usize,
    pub n_stations: usize,
    pub ports_per_station: u32,
    pub n_vehicles: u32,
    /// `(model, capacity kWh, consumption kWh/km)`; vehicles are split evenly.
    pub models: Vec<(String, f64, f64)>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig::desk()
    }
}

fn default_models() -> Vec<(String, f64, f64)> {
    vec![
        (String::from("VFe34"), 42.0, 0.150),
        (String::from("VF8"), 87.7, 0.190),
        (String::from("VF9"), 123.0, 0.220),
    ]
}

impl SynthConfig {
    /// Small scenario: 4 km x 4 km, 200 vehicles, 6 stations.
    pub fn desk() -> Self {
        SynthConfig {
            width_km: 4.0,
            height_km: 4.0,
            cell_size_km: 0.25,
            grid_roads_x: 9,
            grid_roads_y: 9,
            base_density: 500.0,
            hotspots: vec![
                Hotspot { x_frac: 0.28, y_frac: 0.70, sigma_km: 0.6, weight: 9000.0 },
                Hotspot { x_frac: 0.72, y_frac: 0.35, sigma_km: 0.5, weight: 6000.0 },
                Hotspot { x_frac: 0.55, y_frac: 0.80, sigma_km: 0.4, weight: 3000.0 },
            ],
            n_buildings: 150,
            substation_lattice: 2,
            n_stations: 6,
            ports_per_station: 2,
            n_vehicles: 200,
            models: default_models(),
        }
    }

    /// Full-size scenario: 3000 vehicles and 30 existing stations.
    pub fn paper() -> Self {
        SynthConfig {
            width_km: 10.0,
            height_km: 8.0,
            cell_size_km: 0.25,
            grid_roads_x: 21,
            grid_roads_y: 17,
            base_density: 800.0,
            hotspots: vec![
                Hotspot { x_frac: 0.25, y_frac: 0.65, sigma_km: 1.2, weight: 25000.0 },
                Hotspot { x_frac: 0.60, y_frac: 0.40, sigma_km: 1.0, weight: 18000.0 },
                Hotspot { x_frac: 0.80, y_frac: 0.75, sigma_km: 0.8, weight: 12000.0 },
                Hotspot { x_frac: 0.45, y_frac: 0.15, sigma_km: 0.9, weight: 8000.0 },
            ],
            n_buildings: 900,
            substation_lattice: 3,
            n_stations: 30,
            ports_per_station: 2,
            n_vehicles: 3000,
            models: default_models(),
        }
    }

    fn check(&self) -> Result<(), GeoError> {
        let bad = |path: &str, msg: &str| Err(GeoError::validation(path, msg));
        if !(self.width_km > 0.0 && self.height_km > 0.0) {
            return bad("width_km", "domain extent must be positive");
        }
        if !(self.cell_size_km > 0.0) {
            return bad("cell_size_km", "must be positive");
        }
        if self.grid_roads_x < 2 || self.grid_roads_y < 2 {
            return bad("grid_roads_x", "at least 2 grid roads per axis are required");
        }
        if self.hotspots.is_empty() {
            return bad("hotspots", "at least one hotspot is required");
        }
        for (i, h) in self.hotspots.iter().enumerate() {
            if !(h.sigma_km > 0.0) || h.weight < 0.0 {
                return Err(GeoError::validation(
                    format!("hotspots[{i}]"),
                    "sigma_km must be positive and weight >= 0",
                ));
            }
        }
        if !(self.base_density >= 0.0) {
            return bad("base_density", "must be >= 0");
        }
        if self.n_buildings < 2 {
            return bad("n_buildings", "at least 2 buildings are required");
        }
        if self.substation_lattice == 0 {
            return bad("substation_lattice", "must be >= 1");
        }
        if self.n_vehicles == 0 || self.models.is_empty() {
            return bad("n_vehicles", "fleet must not be empty");
        }
        Ok(())
    }
}

/// Builds a scenario from `config`; a pure function of `(config, seed)`.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<Scenario, GeoError> {
    config.check()?;
    let mut rng = stream(seed, Stream::Synthetic);
    let domain = Domain::new(0.0, 0.0, config.width_km, config.height_km);

    let cols = math::ceil(config.width_km / config.cell_size_km - 1e-9) as usize;
    let rows = math::ceil(config.height_km / config.cell_size_km - 1e-9) as usize;
    let mut cells = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let x = (c as f64 + 0.5) * config.cell_size_km;
            let y = (r as f64 + 0.5) * config.cell_size_km;
            let mut v = config.base_density;
            for h in &config.hotspots {
                let dx = x - h.x_frac * config.width_km;
                let dy = y - h.y_frac * config.height_km;
                v += h.weight * math::exp(-(dx * dx + dy * dy) / (2.0 * h.sigma_km * h.sigma_km));
            }
            cells[r * cols + c] = v;
        }
    }
    let raster = PopulationRaster::new(Point::new(0.0, 0.0), config.cell_size_km, rows, cols, cells)?;

    let (nx, ny) = (config.grid_roads_x, config.grid_roads_y);
    let dx = config.width_km / (nx - 1) as f64;
    let dy = config.height_km / (ny - 1) as f64;
    let mut nodes = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            nodes.push(Point::new(i as f64 * dx, j as f64 * dy));
        }
    }
    let mut edges = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let id = j * nx + i;
            if i + 1 < nx {
                edges.push(Edge { a: id, b: id + 1, length: dx });
            }
            if j + 1 < ny {
                edges.push(Edge { a: id, b: id + nx, length: dy });
            }
        }
    }
    let roads = RoadNetwork::new(nodes, edges);

    // Buildings: density-proportional cells, uniform within the cell.
    let weights = raster.cells.clone();
    let mut buildings = Vec::with_capacity(config.n_buildings);
    for _ in 0..config.n_buildings {
        let idx = sample_weighted(&weights, &mut rng)
            .ok_or_else(|| GeoError::Generation("raster has no positive density".into()))?;
        let corner = raster.cell_center_by_index(idx);
        let half = config.cell_size_km / 2.0;
        let p = Point::new(
            corner.x + rng.gen_range(-half..half),
            corner.y + rng.gen_range(-half..half),
        );
        buildings.push(domain.clamp(p));
    }

    let lat = config.substation_lattice;
    let mut substations = Vec::with_capacity(lat * lat);
    for j in 0..lat {
        for i in 0..lat {
            substations.push(Point::new(
                (i as f64 + 0.5) * config.width_km / lat as f64,
                (j as f64 + 0.5) * config.height_km / lat as f64,
            ));
        }
    }

    // Existing stations: distinct density-proportional cells.
    let positive = raster.positive_cells().len();
    if config.n_stations > positive {
        return Err(GeoError::Generation(format!(
            "{} stations requested but only {} candidate cells have positive density",
            config.n_stations, positive
        )));
    }
    let catalog = PortCatalog::default();
    let freq = catalog.frequency_weights();
    let mut remaining = weights;
    let mut stations = Vec::with_capacity(config.n_stations);
    for k in 0..config.n_stations {
        let idx = sample_weighted(&remaining, &mut rng)
            .ok_or_else(|| GeoError::Generation("ran out of candidate cells".into()))?;
        remaining[idx] = 0.0;
        let port = sample_weighted(&freq, &mut rng)
            .and_then(PortType::from_index)
            .expect("catalog has positive frequencies");
        stations.push(StationSite::new(
            format!("cs{:02}", k + 1),
            raster.cell_center_by_index(idx),
            vec![PortGroup { port_type: port, count: config.ports_per_station }],
        ));
    }

    let n_models = config.models.len() as u32;
    let fleet = config
        .models
        .iter()
        .enumerate()
        .map(|(i, (model, cap, cons))| {
            let base = config.n_vehicles / n_models;
            let extra = u32::from((i as u32) < config.n_vehicles % n_models);
            FleetEntry {
                model: model.clone(),
                capacity_kwh: *cap,
                consumption_kwh_per_km: *cons,
                count: base + extra,
            }
        })
        .collect();

    let mut scenario = Scenario {
        domain,
        raster,
        roads,
        buildings,
        substations,
        existing_stations: stations,
        fleet,
        coordinate_mode: CoordinateMode::Planar,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// A 6 km x 6 km scenario with one clearly best candidate: three stations
/// whose single interior Voronoi vertex, (3, 2.5), is 2.5 km from each, sits
/// on a substation and lies in the only dense cells.
pub fn toy_dominant() -> Scenario {
    let mut raster = PopulationRaster::uniform(Point::new(0.0, 0.0), 1.0, 6, 6, 100.0);
    raster.cells[2 * 6 + 2] = 2000.0;
    raster.cells[2 * 6 + 3] = 2000.0;
    let corners = [Point::new(0.0, 0.0), Point::new(6.0, 0.0), Point::new(6.0, 6.0), Point::new(0.0, 6.0)];
    let roads = RoadNetwork::new(
        corners.to_vec(),
        (0..4).map(|i| Edge { a: i, b: (i + 1) % 4, length: 6.0 }).collect(),
    );
    let station = |id: &str, x, y| {
        StationSite::new(id, Point::new(x, y), vec![PortGroup { port_type: PortType::new(5).unwrap(), count: 2 }])
    };
    let mut scenario = Scenario {
        domain: Domain::new(0.0, 0.0, 6.0, 6.0),
        raster,
        roads,
        buildings: corners.to_vec(),
        substations: vec![Point::new(3.0, 2.5)],
        existing_stations: vec![station("a", 1.0, 1.0), station("b", 5.0, 1.0), station("c", 3.0, 5.0)],
        fleet: vec![FleetEntry {
            model: String::from("VFe34"),
            capacity_kwh: 42.0,
            consumption_kwh_per_km: 0.15,
            count: 10,
        }],
        coordinate_mode: CoordinateMode::Planar,
    };
    scenario.validate().expect("toy scenario is valid");
    scenario
}
