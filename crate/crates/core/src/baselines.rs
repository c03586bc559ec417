//! Static placement baselines and port-assignment strategies.
//!
//! Location methods pick `k` points; a port strategy then gives each new
//! station `ports_per_station` ports of one drawn type.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{
    observe, reward_exist, reward_pop, reward_sub, EnvConfig, EnvError, PlacementPlan, WaitContext,
};
use crate::geo::{Point, PopulationRaster, PortGroup, Scenario, StationSite};
use crate::math;
use crate::ports::{PortCatalog, PortType};
use crate::rng::{sample_weighted, stream, SimRng, Stream};
use crate::voronoi::candidates_for;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("asked for {k} stations but only {available} cells have positive density")]
    Infeasible { k: usize, available: usize },
    #[error("no candidates left after {placed} greedy placements")]
    NoCandidates { placed: usize },
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    VoronoiGreedy,
    Radial,
    Probabilistic,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::VoronoiGreedy, Method::Radial, Method::Probabilistic];

    pub fn name(self) -> &'static str {
        match self {
            Method::VoronoiGreedy => "voronoi_greedy",
            Method::Radial => "radial",
            Method::Probabilistic => "probabilistic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortStrategy {
    /// Draw by system-wide frequency.
    Random,
    /// Frequency tilted toward high power where density is high.
    Density,
}

impl PortStrategy {
    pub const ALL: [PortStrategy; 2] = [PortStrategy::Random, PortStrategy::Density];

    pub fn name(self) -> &'static str {
        match self {
            PortStrategy::Random => "random_ports",
            PortStrategy::Density => "density_ports",
        }
    }
}

/// Greedy over Voronoi candidates by `r_pop + r_exist + r_sub`; the first
/// maximum wins ties. No simulation is involved.
pub fn place_voronoi_greedy(
    scenario: &Scenario,
    initial: &[StationSite],
    k: usize,
    config: &EnvConfig,
) -> Result<Vec<Point>, BaselineError> {
    let mode = scenario.coordinate_mode;
    let mut sites: Vec<Point> = initial.iter().map(StationSite::location).collect();
    let mut out = Vec::with_capacity(k);
    let none = WaitContext::zeros(sites.len());
    for placed in 0..k {
        let candidates = if sites.is_empty() {
            scenario.domain.corners().to_vec()
        } else {
            candidates_for(&sites, scenario.domain, config.min_separation_km, mode).map_err(EnvError::from)?
        };
        let mut best: Option<(Point, f64)> = None;
        for c in candidates {
            let score = if sites.is_empty() {
                let rho = scenario.raster.density_at(c).map_err(EnvError::from)?;
                let d_sub = scenario.substations.iter().map(|s| crate::geo::distance(c, *s, mode)).fold(f64::INFINITY, f64::min);
                deterministic_reward(rho, f64::INFINITY, d_sub, scenario, config)?
            } else {
                let st = observe(c, &sites, &scenario.substations, scenario, &none, &config.weights)?;
                deterministic_reward(st.rho, st.d_nearest, st.d_nearest_sub, scenario, config)?
            };
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((c, score));
            }
        }
        let (p, _) = best.ok_or(BaselineError::NoCandidates { placed })?;
        sites.push(p);
        out.push(p);
    }
    Ok(out)
}

fn deterministic_reward(
    rho: f64,
    d_nearest: f64,
    d_sub: f64,
    scenario: &Scenario,
    config: &EnvConfig,
) -> Result<f64, EnvError> {
    let w = &config.weights;
    Ok(reward_pop(rho, scenario.raster.rho_max(), w)?
        + reward_exist(d_nearest, w, config.exist_reward_form)
        + reward_sub(d_sub, w))
}

/// Concentric rings around the domain center at 1/3, 2/3 and 1 of half the
/// diagonal. Ring `i` holds up to `ceil(k * i / 6)` points, equally spaced
/// from a seeded phase; rings fill inward to outward and points outside the
/// domain are clamped onto it.
pub fn place_radial(scenario: &Scenario, k: usize, seed: u64) -> Vec<Point> {
    let mut rng = stream(seed, Stream::Placement);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let d = scenario.domain;
    let c = d.center();
    let r_max = 0.5 * math::hypot(d.width(), d.height());
    let mut out = Vec::with_capacity(k);
    for ring in 1..=3usize {
        let remaining = k - out.len();
        if remaining == 0 {
            break;
        }
        let n = remaining.min((k * ring).div_ceil(6));
        let r = r_max * ring as f64 / 3.0;
        for m in 0..n {
            let a = phase + 2.0 * PI * m as f64 / n as f64;
            out.push(d.clamp(Point::new(c.x + r * math::cos(a), c.y + r * math::sin(a))));
        }
    }
    out
}

/// `k` distinct raster cells drawn without replacement, each with
/// probability proportional to its density among those left; returns the
/// cell centers.
pub fn place_probabilistic(raster: &PopulationRaster, k: usize, seed: u64) -> Result<Vec<Point>, BaselineError> {
    let mut rng = stream(seed, Stream::Placement);
    Ok(sample_cells(raster, k, &mut rng)?.into_iter().map(|i| raster.cell_center_by_index(i)).collect())
}

fn sample_cells(raster: &PopulationRaster, k: usize, rng: &mut SimRng) -> Result<Vec<usize>, BaselineError> {
    let positive = raster.positive_cells();
    if k > positive.len() {
        return Err(BaselineError::Infeasible { k, available: positive.len() });
    }
    let mut weights: Vec<f64> = positive.iter().map(|i| raster.cells[*i]).collect();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let j = sample_weighted(&weights, rng).expect("positive weight remains");
        weights[j] = 0.0;
        out.push(positive[j]);
    }
    Ok(out)
}

/// `k` independent draws with `P(j) = pt_j / sum(pt)`.
pub fn assign_ports_random<R: Rng + ?Sized>(k: usize, catalog: &PortCatalog, rng: &mut R) -> Vec<PortType> {
    let w = catalog.frequency_weights();
    (0..k).map(|_| draw(&w, rng)).collect()
}

/// `P(j)` proportional to `pt_j * (power_j / max_power)^(rho / rho_max)`.
pub fn density_port_weights(rho: f64, rho_max: f64, catalog: &PortCatalog) -> [f64; crate::ports::PORT_TYPE_COUNT] {
    let tilt = if rho_max > 0.0 { rho / rho_max } else { 0.0 };
    let max_power = catalog.max_power();
    let mut w = catalog.frequency_weights();
    for (j, p) in PortType::all().enumerate() {
        w[j] *= math::pow(catalog.power(p) / max_power, tilt);
    }
    w
}

pub fn assign_ports_density<R: Rng + ?Sized>(
    locations: &[Point],
    raster: &PopulationRaster,
    catalog: &PortCatalog,
    rng: &mut R,
) -> Result<Vec<PortType>, BaselineError> {
    locations
        .iter()
        .map(|p| {
            let rho = raster.density_at(*p).map_err(EnvError::from)?;
            Ok(draw(&density_port_weights(rho, raster.rho_max(), catalog), rng))
        })
        .collect()
}

fn draw<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> PortType {
    let j = sample_weighted(weights, rng).expect("positive port weights");
    PortType::from_index(j).expect("index within catalog")
}

/// Runs one location method with one port strategy and packages the result.
pub fn run_baseline(
    scenario: &Scenario,
    initial: &[StationSite],
    method: Method,
    ports: PortStrategy,
    k: usize,
    seed: u64,
    config: &EnvConfig,
) -> Result<PlacementPlan, BaselineError> {
    let locations = match method {
        Method::VoronoiGreedy => place_voronoi_greedy(scenario, initial, k, config)?,
        Method::Radial => place_radial(scenario, k, seed),
        Method::Probabilistic => place_probabilistic(&scenario.raster, k, seed)?,
    };
    let catalog = PortCatalog::default();
    // Ports draw from their own stream so the location draws stay comparable.
    let mut rng = stream(seed ^ 0x706f_7274, Stream::Placement);
    let types = match ports {
        PortStrategy::Random => assign_ports_random(locations.len(), &catalog, &mut rng),
        PortStrategy::Density => assign_ports_density(&locations, &scenario.raster, &catalog, &mut rng)?,
    };
    let added = locations
        .iter()
        .zip(&types)
        .enumerate()
        .map(|(i, (p, t))| {
            StationSite::new(
                format!("{}{:02}", short(method), i + 1),
                *p,
                alloc::vec![PortGroup { port_type: *t, count: config.ports_per_station }],
            )
        })
        .collect();
    Ok(PlacementPlan {
        method: String::from(method.name()) + "/" + ports.name(),
        initial: initial.to_vec(),
        added,
        trace: Vec::new(),
    })
}

fn short(method: Method) -> &'static str {
    match method {
        Method::VoronoiGreedy => "vg",
        Method::Radial => "rd",
        Method::Probabilistic => "pb",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{generate_synthetic, test_scenario, SynthConfig};
    use alloc::vec;

    #[test]
    fn greedy_first_pick_matches_exhaustive_scan() {
        let s = generate_synthetic(&SynthConfig::desk(), 2).unwrap();
        let cfg = EnvConfig::default();
        let picks = place_voronoi_greedy(&s, &s.existing_stations, 3, &cfg).unwrap();
        assert_eq!(picks.len(), 3);

        let sites = s.station_points();
        let cands = candidates_for(&sites, s.domain, cfg.min_separation_km, s.coordinate_mode).unwrap();
        let none = WaitContext::zeros(sites.len());
        let rewards: Vec<f64> = cands
            .iter()
            .map(|c| {
                let st = observe(*c, &sites, &s.substations, &s, &none, &cfg.weights).unwrap();
                st.rho / s.raster.rho_max() * 10.0
                    + if st.d_nearest < 1.0 { 0.0 } else { (10.0 - st.d_nearest).max(0.0) }
                    + (10.0 - st.d_nearest_sub).max(0.0)
            })
            .collect();
        let best = math::argmax(&rewards).unwrap();
        assert_eq!(picks[0], cands[best]);
        assert_eq!(place_voronoi_greedy(&s, &s.existing_stations, 3, &cfg).unwrap(), picks);
        assert!(place_voronoi_greedy(&s, &s.existing_stations, 0, &cfg).unwrap().is_empty());
    }

    #[test]
    fn radial_construction() {
        let s = test_scenario();
        let one = place_radial(&s, 1, 9);
        let mut rng = stream(9, Stream::Placement);
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        let r = 0.5 * math::hypot(2.0, 2.0) / 3.0;
        assert_eq!(one, vec![Point::new(1.0 + r * math::cos(phase), 1.0 + r * math::sin(phase))]);
        for k in 1..=60 {
            let pts = place_radial(&s, k, k as u64);
            assert_eq!(pts.len(), k);
            assert!(pts.iter().all(|p| s.domain.contains(*p)));
        }
        assert_eq!(place_radial(&s, 7, 3), place_radial(&s, 7, 3));
    }

    #[test]
    fn probabilistic_forced_and_infeasible() {
        let mut raster = PopulationRaster::uniform(Point::new(0.0, 0.0), 1.0, 2, 2, 0.0);
        raster.cells[3] = 5.0;
        raster.validate("raster").unwrap();
        assert_eq!(place_probabilistic(&raster, 1, 0).unwrap(), vec![Point::new(1.5, 1.5)]);
        assert_eq!(place_probabilistic(&raster, 2, 0), Err(BaselineError::Infeasible { k: 2, available: 1 }));
    }

    #[test]
    fn probabilistic_follows_density() {
        let mut raster = PopulationRaster::uniform(Point::new(0.0, 0.0), 1.0, 1, 2, 100.0);
        raster.cells[0] = 900.0;
        raster.validate("raster").unwrap();
        let mut rng = stream(4, Stream::Placement);
        let n = 10_000;
        let first = (0..n).filter(|_| sample_cells(&raster, 1, &mut rng).unwrap()[0] == 0).count();
        let p = first as f64 / n as f64;
        // 0.9 with a binomial standard error of 0.003.
        assert!((p - 0.9).abs() < 0.012, "{p}");

        let uniform = PopulationRaster::uniform(Point::new(0.0, 0.0), 1.0, 2, 2, 3.0);
        let mut counts = [0u32; 4];
        for _ in 0..n {
            counts[sample_cells(&uniform, 1, &mut rng).unwrap()[0]] += 1;
        }
        let e = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|c| (f64::from(*c) - e).powi(2) / e).sum();
        assert!(chi2 < 16.27, "{chi2}");
    }

    #[test]
    fn density_tilt_identities() {
        let catalog = PortCatalog::default();
        let base = density_port_weights(0.0, 100.0, &catalog);
        assert_eq!(base, catalog.frequency_weights());
        let full = density_port_weights(100.0, 100.0, &catalog);
        let untilted = base[9] / base[0];
        let tilted = full[9] / full[0];
        assert!((tilted / untilted - 250.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn random_ports_are_seeded() {
        let catalog = PortCatalog::default();
        let a = assign_ports_random(50, &catalog, &mut stream(1, Stream::Placement));
        let b = assign_ports_random(50, &catalog, &mut stream(1, Stream::Placement));
        assert_eq!(a, b);
    }

    #[test]
    fn every_baseline_yields_k_stations_inside() {
        let s = generate_synthetic(&SynthConfig::desk(), 1).unwrap();
        let cfg = EnvConfig::default();
        for m in Method::ALL {
            for p in PortStrategy::ALL {
                let plan = run_baseline(&s, &s.existing_stations, m, p, 6, 3, &cfg).unwrap();
                assert_eq!(plan.added.len(), 6, "{}", plan.method);
                assert!(plan.added.iter().all(|st| s.domain.contains(st.location()) && st.port_count() == 4));
            }
        }
    }
}
