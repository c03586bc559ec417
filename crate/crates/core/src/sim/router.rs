use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::vehicle::Leg;
use crate::geo::{distance, CoordinateMode, Point, RoadNetwork, Scenario, ShortestPathTree};

/// Road routing for a run, with shortest-path trees cached per source node.
#[derive(Debug, Clone)]
pub struct Router<'a> {
    roads: &'a RoadNetwork,
    mode: CoordinateMode,
    buildings: &'a [Point],
    building_nodes: Vec<usize>,
    trees: Vec<Option<ShortestPathTree>>,
}

impl<'a> Router<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let roads = &scenario.roads;
        let mode = scenario.coordinate_mode;
        let building_nodes = scenario
            .buildings
            .iter()
            .map(|b| roads.nearest_node(*b, mode))
            .collect();
        Router {
            roads,
            mode,
            buildings: &scenario.buildings,
            building_nodes,
            trees: vec![None; roads.node_count()],
        }
    }

    pub fn mode(&self) -> CoordinateMode {
        self.mode
    }

    pub fn buildings(&self) -> &[Point] {
        self.buildings
    }

    pub fn building_node(&self, b: usize) -> usize {
        self.building_nodes[b]
    }

    pub fn nearest_node(&self, p: Point) -> usize {
        self.roads.nearest_node(p, self.mode)
    }

    /// Straight-line access distance between a point and a road node.
    pub fn access_km(&self, p: Point, node: usize) -> f64 {
        distance(p, self.roads.nodes[node], self.mode)
    }

    fn tree(&mut self, source: usize) -> &ShortestPathTree {
        if self.trees[source].is_none() {
            // Scenario validation guarantees a connected graph.
            let t = self
                .roads
                .shortest_path_tree(source)
                .expect("source node in range");
            self.trees[source] = Some(t);
        }
        self.trees[source].as_ref().unwrap()
    }

    /// Route from `from` (reaching `from_node` after `lead_km`) over the
    /// road network to `to_node`, then straight to `to`.
    pub fn leg(&mut self, from: Point, from_node: usize, lead_km: f64, to_node: usize, to: Point) -> Leg {
        let tail = self.access_km(to, to_node);
        let path = self
            .tree(from_node)
            .path_to(to_node)
            .expect("road network is connected");
        let mut points = Vec::with_capacity(path.len() + 2);
        let mut nodes = Vec::with_capacity(path.len() + 2);
        let mut lengths = Vec::with_capacity(path.len() + 1);
        points.push(from);
        nodes.push(None);
        lengths.push(lead_km);
        for (k, &n) in path.iter().enumerate() {
            points.push(self.roads.nodes[n]);
            nodes.push(Some(n));
            if k + 1 < path.len() {
                let w = self
                    .roads
                    .edge_length(n, path[k + 1])
                    .expect("consecutive path nodes share an edge");
                lengths.push(w);
            }
        }
        points.push(to);
        nodes.push(None);
        lengths.push(tail);
        let mut leg = Leg {
            points,
            nodes,
            lengths,
            seg: 0,
            offset: 0.0,
        };
        leg.advance(0.0);
        leg
    }

    /// Road distance from a point (attached to `from_node` by `lead_km`) to
    /// building `b`.
    pub fn road_km_to_building(&mut self, from_node: usize, lead_km: f64, b: usize) -> f64 {
        let bn = self.building_nodes[b];
        let tail = self.access_km(self.buildings[b], bn);
        lead_km + self.tree(from_node).dist[bn] + tail
    }

    /// Uniform choice among buildings at least `min_trip_km` away by road
    /// (excluding `current`); the farthest building when none qualifies.
    pub fn pick_destination<R: Rng + ?Sized>(
        &mut self,
        from_node: usize,
        lead_km: f64,
        current: Option<usize>,
        min_trip_km: f64,
        rng: &mut R,
    ) -> usize {
        let n = self.buildings.len();
        let mut eligible = Vec::new();
        let mut farthest: Option<(usize, f64)> = None;
        for b in 0..n {
            if Some(b) == current {
                continue;
            }
            let d = self.road_km_to_building(from_node, lead_km, b);
            if d >= min_trip_km {
                eligible.push(b);
            }
            if farthest.map_or(true, |(_, fd)| d > fd) {
                farthest = Some((b, d));
            }
        }
        if eligible.is_empty() {
            farthest.map(|(b, _)| b).unwrap_or(0)
        } else {
            eligible[rng.gen_range(0..eligible.len())]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{Domain, Edge, FleetEntry, PopulationRaster};
    use crate::rng::{stream, Stream};
    use alloc::vec;
    use alloc::vec::Vec;

    fn line_scenario(buildings: Vec<Point>) -> Scenario {
        let nodes: Vec<Point> = (0..=4).map(|i| Point::new(i as f64 * 0.5, 0.0)).collect();
        let edges = (0..4).map(|i| Edge { a: i, b: i + 1, length: 0.5 }).collect();
        Scenario {
            domain: Domain::new(0.0, 0.0, 2.0, 1.0),
            raster: PopulationRaster::uniform(Point::new(0.0, 0.0), 1.0, 1, 2, 1.0),
            roads: RoadNetwork::new(nodes, edges),
            buildings,
            substations: vec![Point::new(1.0, 0.5)],
            existing_stations: vec![],
            fleet: vec![FleetEntry {
                model: "m".into(),
                capacity_kwh: 42.0,
                consumption_kwh_per_km: 0.15,
                count: 1,
            }],
            coordinate_mode: CoordinateMode::Planar,
        }
    }

    #[test]
    fn min_trip_filter_forces_the_far_building() {
        let s = line_scenario(vec![Point::new(0.0, 0.0), Point::new(0.2, 0.0), Point::new(2.0, 0.0)]);
        let mut r = Router::new(&s);
        let mut rng = stream(3, Stream::Destinations);
        for _ in 0..20 {
            assert_eq!(r.pick_destination(0, 0.0, Some(0), 1.0, &mut rng), 2);
        }
    }

    #[test]
    fn zero_min_trip_is_uniform_over_other_buildings() {
        let s = line_scenario(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]);
        let mut r = Router::new(&s);
        let mut rng = stream(4, Stream::Destinations);
        let mut counts = [0usize; 4];
        for _ in 0..3000 {
            counts[r.pick_destination(0, 0.0, Some(0), 0.0, &mut rng)] += 1;
        }
        assert_eq!(counts[0], 0);
        for c in &counts[1..] {
            assert!((*c as f64 - 1000.0).abs() < 120.0, "{counts:?}");
        }
    }

    #[test]
    fn no_eligible_building_falls_back_to_farthest() {
        let s = line_scenario(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0)]);
        let mut r = Router::new(&s);
        let mut rng = stream(5, Stream::Destinations);
        assert_eq!(r.pick_destination(0, 0.0, Some(0), 50.0, &mut rng), 2);
    }

    #[test]
    fn leg_follows_the_road() {
        let s = line_scenario(vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)]);
        let mut r = Router::new(&s);
        let leg = r.leg(Point::new(0.0, 0.2), 0, 0.2, 4, Point::new(2.0, 0.1));
        assert!((leg.remaining_km() - (0.2 + 2.0 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn destination_sequence_is_seed_determined() {
        let s = line_scenario((0..5).map(|i| Point::new(i as f64 * 0.5, 0.0)).collect());
        let draw = |seed| {
            let mut r = Router::new(&s);
            let mut rng = stream(seed, Stream::Destinations);
            (0..10).map(|_| r.pick_destination(0, 0.0, None, 0.0, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(8), draw(8));
    }
}
