use proptest::prelude::*;
use voltsite_core::dqn::{ReplayBuffer, TrainConfig, Transition};
use voltsite_core::env::{reward_exist, reward_pop, reward_sub, reward_wait, ExistRewardForm, RewardWeights};
use voltsite_core::geo::{distance, CoordinateMode, Domain, Point, PopulationRaster};
use voltsite_core::metrics::gap;
use voltsite_core::ports::PortType;
use voltsite_core::sim::charging_duration;
use voltsite_core::voronoi::compute_diagram;

fn point_in(lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    (lo..hi, lo..hi).prop_map(|(x, y)| Point::new(x, y))
}

fn lonlat() -> impl Strategy<Value = Point> {
    (105.0..106.5f64, 20.5..21.5f64).prop_map(|(x, y)| Point::new(x, y))
}

fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].x * poly[(i + 1) % n].y - poly[(i + 1) % n].x * poly[i].y).sum::<f64>() / 2.0
}

proptest! {
    #[test]
    fn planar_distance_is_a_metric(a in point_in(-50.0, 50.0), b in point_in(-50.0, 50.0), c in point_in(-50.0, 50.0)) {
        let d = |p, q| distance(p, q, CoordinateMode::Planar);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
    }

    #[test]
    fn geographic_distance_is_a_metric(a in lonlat(), b in lonlat(), c in lonlat()) {
        let d = |p, q| distance(p, q, CoordinateMode::Geographic);
        prop_assert!((d(a, b) - d(b, a)).abs() <= 1e-12);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        // One degree of latitude is about 111.2 km on the mean sphere.
        prop_assert!(d(a, b) <= 111.2 * ((a.x - b.x).abs() + (a.y - b.y).abs()) + 1e-9);
    }

    #[test]
    fn voronoi_cells_tile_the_domain(sites in prop::collection::vec(point_in(0.0, 10.0), 1..25)) {
        let domain = Domain::new(0.0, 0.0, 10.0, 10.0);
        let d = compute_diagram(&sites, domain).unwrap();
        prop_assert_eq!(d.regions.len(), d.sites.len());
        let area: f64 = d.regions.iter().map(|r| shoelace(r)).sum();
        prop_assert!((area - 100.0).abs() <= 1e-6, "cell areas sum to {}", area);
        for (i, cell) in d.regions.iter().enumerate() {
            prop_assert!(shoelace(cell) >= 0.0);
            for v in cell {
                prop_assert!(domain.contains(*v));
                let own = d.sites[i].euclidean(v);
                let nearest = d.sites.iter().map(|s| s.euclidean(v)).fold(f64::INFINITY, f64::min);
                prop_assert!(own <= nearest + 1e-9);
            }
        }
        for v in &d.vertices {
            prop_assert!(d.regions.iter().any(|r| r.contains(v)));
        }
    }

    #[test]
    fn reward_terms_stay_in_range(
        rho_max in 1e-3..1e5f64,
        frac in 0.0..=1.0f64,
        d_exist in 0.0..50.0f64,
        d_sub in 0.0..50.0f64,
        t_avg in 0.0..48.0f64,
    ) {
        let w = RewardWeights::default();
        let terms = [
            reward_pop(frac * rho_max, rho_max, &w).unwrap(),
            reward_exist(d_exist, &w, ExistRewardForm::Prose),
            reward_exist(d_exist, &w, ExistRewardForm::Formula),
            reward_sub(d_sub, &w),
            reward_wait(t_avg, &w),
        ];
        for t in terms {
            prop_assert!((0.0..=10.0).contains(&t), "term {}", t);
        }
    }

    #[test]
    fn gap_sign_follows_the_wait(base in 1e-3..10.0f64, wait in 0.0..10.0f64) {
        let g = gap(base, wait).unwrap();
        prop_assert!(g <= 100.0);
        prop_assert_eq!(g > 0.0, wait < base);
        prop_assert_eq!(gap(base, base).unwrap(), 0.0);
    }

    #[test]
    fn charging_time_grows_with_target(cap in 10.0..150.0f64, from in 0.0..0.5f64, a in 0.5..0.75f64, b in 0.75..=1.0f64, kw in 3.0..250.0f64) {
        let short = charging_duration(cap, from, a, kw).unwrap();
        let long = charging_duration(cap, from, b, kw).unwrap();
        prop_assert!(0.0 < short && short <= long);
        prop_assert!(charging_duration(cap, a, from, kw).is_err());
    }

    #[test]
    fn raster_lookup_stays_in_bounds(rows in 1usize..12, cols in 1usize..12, fx in 0.0..=1.0f64, fy in 0.0..=1.0f64) {
        let cells = vec![1.0; rows * cols];
        let r = PopulationRaster::new(Point::new(2.0, -3.0), 0.5, rows, cols, cells).unwrap();
        let p = Point::new(2.0 + fx * 0.5 * cols as f64, -3.0 + fy * 0.5 * rows as f64);
        let (row, col) = r.cell_of(p).unwrap();
        prop_assert!(row < rows && col < cols);
    }

    #[test]
    fn replay_keeps_the_newest(cap in 1usize..20, pushes in 0usize..60) {
        let mut replay = ReplayBuffer::new(cap);
        for i in 0..pushes {
            replay.push(Transition {
                state: [0.0; 5],
                port: PortType::new(1).unwrap(),
                reward: i as f64,
                next_states: Vec::new(),
                terminal: true,
            });
        }
        let kept: Vec<f64> = replay.iter().map(|t| t.reward).collect();
        let expect: Vec<f64> = (pushes.saturating_sub(cap)..pushes).map(|i| i as f64).collect();
        prop_assert_eq!(kept, expect);
    }

    #[test]
    fn epsilon_is_monotone_and_floored(t in 0u64..100_000) {
        let tc = TrainConfig::default();
        let (now, next) = (tc.epsilon(t), tc.epsilon(t + 1));
        prop_assert!(next <= now);
        prop_assert!((0.05..=1.0).contains(&now));
    }
}
