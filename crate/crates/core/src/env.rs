//! Placement environment: candidate states, the composite action, the hybrid
//! reward and the reset/step transition over a growing station set.

use alloc::format;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geo::{distance, GeoError, Point, PortGroup, Scenario, StationSite};
use crate::ports::{PortCatalog, PortType};
use crate::rng::{sample_weighted, stream, Stream};
use crate::sim::{self, SimError, SimulationConfig, SimulationResult};
use crate::voronoi::{candidates_for, VoronoiError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("no stations to observe from")]
    NoStations,
    #[error("no substations to observe from")]
    NoSubstations,
    #[error("rho_max must be positive and finite, got {0}")]
    InvalidRhoMax(f64),
    #[error("density {rho} outside [0, {rho_max}]")]
    DensityOutOfRange { rho: f64, rho_max: f64 },
    #[error("action location {loc} out of range for {len} candidates")]
    InvalidAction { loc: usize, len: usize },
    #[error("no candidate locations remain")]
    NoCandidates,
    #[error("environment used before reset")]
    NotReset,
    #[error("invalid environment config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Features of one candidate location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub d_nearest: f64,
    pub d_nearest_sub: f64,
    pub rho: f64,
    pub n_stations: u32,
    pub t_avg: f64,
}

pub const STATE_SIZE: usize = 5;

impl StateVector {
    /// Network input: distances over 10 km, density over its maximum,
    /// station count over 10 and waiting time over 5 h.
    pub fn normalized(&self, rho_max: f64) -> [f64; STATE_SIZE] {
        [
            self.d_nearest / 10.0,
            self.d_nearest_sub / 10.0,
            if rho_max > 0.0 { self.rho / rho_max } else { 0.0 },
            f64::from(self.n_stations) / 10.0,
            self.t_avg / 5.0,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub w_pop: f64,
    pub w_exist: f64,
    pub w_sub: f64,
    pub w_wait: f64,
    pub d_min_km: f64,
    pub tau_scale: f64,
    /// Neighborhood radius for `n_stations` and the local waiting time.
    pub radius_km: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_pop: 10.0,
            w_exist: 10.0,
            w_sub: 10.0,
            w_wait: 10.0,
            d_min_km: 1.0,
            tau_scale: 10.0,
            radius_km: 2.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), EnvError> {
        let positive = [self.w_pop, self.w_exist, self.w_sub, self.w_wait, self.tau_scale, self.radius_km];
        if positive.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(EnvError::InvalidConfig("reward weights, tau_scale and radius_km must be positive"));
        }
        if !(self.d_min_km >= 0.0) {
            return Err(EnvError::InvalidConfig("d_min_km must be >= 0"));
        }
        Ok(())
    }

    pub fn max_total(&self) -> f64 {
        self.w_pop + self.w_exist + self.w_sub + self.w_wait
    }
}

/// Which reading of the existing-station term to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistRewardForm {
    /// Zero inside `d_min`, else `max(0, W - d)`.
    #[default]
    Prose,
    /// `max(0, W - d - d_min)`.
    Formula,
}

/// Where the waiting-time term gets its `t_avg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitRewardSource {
    /// System mean wait simulated after the placement.
    #[default]
    PostPlacement,
    /// The chosen candidate's local `t_avg` before the placement.
    PrePlacementLocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    #[default]
    SingleRandom,
    ExistingSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_pop: f64,
    pub r_exist: f64,
    pub r_sub: f64,
    pub r_wait: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn new(r_pop: f64, r_exist: f64, r_sub: f64, r_wait: f64) -> Self {
        RewardBreakdown { r_pop, r_exist, r_sub, r_wait, total: r_pop + r_exist + r_sub + r_wait }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub loc: usize,
    pub port: PortType,
}

pub fn reward_pop(rho: f64, rho_max: f64, weights: &RewardWeights) -> Result<f64, EnvError> {
    if !(rho_max > 0.0 && rho_max.is_finite()) {
        return Err(EnvError::InvalidRhoMax(rho_max));
    }
    if !(0.0..=rho_max).contains(&rho) {
        return Err(EnvError::DensityOutOfRange { rho, rho_max });
    }
    Ok(rho / rho_max * weights.w_pop)
}

pub fn reward_exist(d_nearest: f64, weights: &RewardWeights, form: ExistRewardForm) -> f64 {
    match form {
        ExistRewardForm::Prose if d_nearest < weights.d_min_km => 0.0,
        ExistRewardForm::Prose => (weights.w_exist - d_nearest).max(0.0),
        ExistRewardForm::Formula => (weights.w_exist - d_nearest - weights.d_min_km).max(0.0),
    }
}

pub fn reward_sub(d_sub: f64, weights: &RewardWeights) -> f64 {
    (weights.w_sub - d_sub).max(0.0)
}

pub fn reward_wait(t_avg: f64, weights: &RewardWeights) -> f64 {
    if t_avg <= 0.0 {
        weights.w_wait
    } else {
        weights.w_wait.min(weights.tau_scale / t_avg)
    }
}

/// Waiting-time context for observations: per-station mean waits aligned
/// with the station list, plus the system mean used as a fallback.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WaitContext {
    pub station_waits: Vec<f64>,
    pub system_mean: f64,
}

impl WaitContext {
    pub fn zeros(n: usize) -> Self {
        WaitContext { station_waits: alloc::vec![0.0; n], system_mean: 0.0 }
    }

    pub fn from_result(result: &SimulationResult) -> Self {
        WaitContext { station_waits: result.station_mean_waits(), system_mean: result.system_mean_wait_h }
    }
}

/// Features of `candidate` against the current world. Pure.
pub fn observe(
    candidate: Point,
    stations: &[Point],
    substations: &[Point],
    scenario: &Scenario,
    waits: &WaitContext,
    weights: &RewardWeights,
) -> Result<StateVector, EnvError> {
    if stations.is_empty() {
        return Err(EnvError::NoStations);
    }
    if substations.is_empty() {
        return Err(EnvError::NoSubstations);
    }
    let mode = scenario.coordinate_mode;
    let nearest = |set: &[Point]| set.iter().map(|p| distance(candidate, *p, mode)).fold(f64::INFINITY, f64::min);
    let mut n = 0u32;
    let mut wait_sum = 0.0;
    for (i, s) in stations.iter().enumerate() {
        if distance(candidate, *s, mode) <= weights.radius_km {
            n += 1;
            wait_sum += waits.station_waits.get(i).copied().unwrap_or(0.0);
        }
    }
    Ok(StateVector {
        d_nearest: nearest(stations),
        d_nearest_sub: nearest(substations),
        rho: scenario.raster.density_at(candidate)?,
        n_stations: n,
        t_avg: if n > 0 { wait_sum / f64::from(n) } else { waits.system_mean },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub weights: RewardWeights,
    pub exist_reward_form: ExistRewardForm,
    pub wait_reward_source: WaitRewardSource,
    pub ports_per_station: u32,
    pub min_separation_km: f64,
    /// When false no simulation runs; every `t_avg` is zero and the wait
    /// term uses the pre-placement local value.
    pub simulate: bool,
    pub reset_mode: ResetMode,
    pub sim: SimulationConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            weights: RewardWeights::default(),
            exist_reward_form: ExistRewardForm::Prose,
            wait_reward_source: WaitRewardSource::PostPlacement,
            ports_per_station: 4,
            min_separation_km: 0.05,
            simulate: true,
            reset_mode: ResetMode::SingleRandom,
            sim: SimulationConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        self.weights.validate()?;
        if self.ports_per_station == 0 {
            return Err(EnvError::InvalidConfig("ports_per_station must be >= 1"));
        }
        if !(self.min_separation_km >= 0.0) {
            return Err(EnvError::InvalidConfig("min_separation_km must be >= 0"));
        }
        if self.simulate {
            self.sim.validate()?;
        }
        Ok(())
    }
}

/// What one placement produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub candidate: Point,
    pub state: StateVector,
    pub placed: StationSite,
    pub reward: RewardBreakdown,
    pub sim: Option<SimulationResult>,
}

/// One row of the per-step reward trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub candidate_x: f64,
    pub candidate_y: f64,
    pub port_type: u8,
    pub r_pop: f64,
    pub r_exist: f64,
    pub r_sub: f64,
    pub r_wait: f64,
    pub total: f64,
    pub sim_mean_wait: Option<f64>,
}

impl TraceRow {
    pub fn new(step: usize, outcome: &StepOutcome) -> Self {
        let r = outcome.reward;
        TraceRow {
            step,
            candidate_x: outcome.candidate.x,
            candidate_y: outcome.candidate.y,
            port_type: outcome.placed.ports[0].port_type.get(),
            r_pop: r.r_pop,
            r_exist: r.r_exist,
            r_sub: r.r_sub,
            r_wait: r.r_wait,
            total: r.total,
            sim_mean_wait: outcome.sim.as_ref().map(|s| s.system_mean_wait_h),
        }
    }
}

/// A placement produced by the agent or a baseline: the starting stations,
/// the stations added in order, and the per-step reward trace when the
/// method was rolled out through the environment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub method: alloc::string::String,
    pub initial: Vec<StationSite>,
    pub added: Vec<StationSite>,
    pub trace: Vec<TraceRow>,
}

impl PlacementPlan {
    /// Starting stations followed by the added ones.
    pub fn all_stations(&self) -> Vec<StationSite> {
        let mut all = self.initial.clone();
        all.extend(self.added.iter().cloned());
        all
    }

    pub fn total_reward(&self) -> f64 {
        self.trace.iter().map(|r| r.total).sum()
    }
}

/// The mutable world: station set, candidates and their states.
///
/// Every simulation inside one environment uses the same seed
/// (`config.sim.seed`), so reward differences between placements come from
/// the placements and not from sampling noise.
#[derive(Debug, Clone)]
pub struct Environment<'a> {
    scenario: &'a Scenario,
    config: EnvConfig,
    stations: Vec<StationSite>,
    waits: WaitContext,
    candidates: Vec<Point>,
    states: Vec<StateVector>,
    placed: usize,
    ready: bool,
}

impl<'a> Environment<'a> {
    pub fn new(scenario: &'a Scenario, config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        if scenario.substations.is_empty() {
            return Err(EnvError::NoSubstations);
        }
        if !(scenario.raster.rho_max() > 0.0) {
            return Err(EnvError::InvalidRhoMax(scenario.raster.rho_max()));
        }
        Ok(Environment {
            scenario,
            config,
            stations: Vec::new(),
            waits: WaitContext::default(),
            candidates: Vec::new(),
            states: Vec::new(),
            placed: 0,
            ready: false,
        })
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn stations(&self) -> &[StationSite] {
        &self.stations
    }

    pub fn candidates(&self) -> &[Point] {
        &self.candidates
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn waits(&self) -> &WaitContext {
        &self.waits
    }

    pub fn rho_max(&self) -> f64 {
        self.scenario.raster.rho_max()
    }

    fn make_site(&self, location: Point, port: PortType) -> StationSite {
        StationSite::new(
            format!("new{:02}", self.placed + 1),
            location,
            alloc::vec![PortGroup { port_type: port, count: self.config.ports_per_station }],
        )
    }

    /// Starts an episode. `seed` only matters for the single-random mode.
    pub fn reset(&mut self, seed: u64) -> Result<(), EnvError> {
        self.placed = 0;
        self.stations = match self.config.reset_mode {
            ResetMode::ExistingSet => {
                if self.scenario.existing_stations.is_empty() {
                    return Err(EnvError::NoStations);
                }
                self.scenario.existing_stations.clone()
            }
            ResetMode::SingleRandom => {
                let mut rng = stream(seed, Stream::Reset);
                let d = self.scenario.domain;
                let p = Point::new(rng.gen_range(d.min_x..=d.max_x), rng.gen_range(d.min_y..=d.max_y));
                let weights = PortCatalog::default().frequency_weights();
                let j = sample_weighted(&weights, &mut rng).expect("positive port frequencies");
                let port = PortType::from_index(j).expect("index within catalog");
                let mut site = self.make_site(p, port);
                site.id = "init".into();
                alloc::vec![site]
            }
        };
        self.waits = if self.config.simulate {
            WaitContext::from_result(&self.simulate()?)
        } else {
            WaitContext::zeros(self.stations.len())
        };
        self.refresh()?;
        self.ready = true;
        Ok(())
    }

    fn simulate(&self) -> Result<SimulationResult, EnvError> {
        Ok(sim::run(self.scenario, &self.stations, &self.config.sim, self.config.sim.seed)?)
    }

    fn refresh(&mut self) -> Result<(), EnvError> {
        let points = self.scenario_station_points();
        self.candidates = candidates_for(
            &points,
            self.scenario.domain,
            self.config.min_separation_km,
            self.scenario.coordinate_mode,
        )?;
        self.states = self
            .candidates
            .iter()
            .map(|c| {
                observe(*c, &points, &self.scenario.substations, self.scenario, &self.waits, &self.config.weights)
            })
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    fn scenario_station_points(&self) -> Vec<Point> {
        self.stations.iter().map(StationSite::location).collect()
    }

    /// The deterministic part of the reward for a pre-placement state, with
    /// the wait term taken from that state's local `t_avg`.
    pub fn static_reward(&self, state: &StateVector) -> Result<RewardBreakdown, EnvError> {
        let w = &self.config.weights;
        Ok(RewardBreakdown::new(
            reward_pop(state.rho, self.rho_max(), w)?,
            reward_exist(state.d_nearest, w, self.config.exist_reward_form),
            reward_sub(state.d_nearest_sub, w),
            reward_wait(state.t_avg, w),
        ))
    }

    /// Places a station at the chosen candidate and advances the world.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        if !self.ready {
            return Err(EnvError::NotReset);
        }
        let len = self.candidates.len();
        if action.loc >= len {
            return Err(EnvError::InvalidAction { loc: action.loc, len });
        }
        let candidate = self.candidates[action.loc];
        let state = self.states[action.loc];
        let pre = self.static_reward(&state)?;

        let site = self.make_site(candidate, action.port);
        self.stations.push(site.clone());
        self.placed += 1;

        let sim = if self.config.simulate {
            let result = self.simulate()?;
            self.waits = WaitContext::from_result(&result);
            Some(result)
        } else {
            self.waits.station_waits.push(0.0);
            None
        };
        let r_wait = match (&sim, self.config.wait_reward_source) {
            (Some(result), WaitRewardSource::PostPlacement) => {
                reward_wait(result.system_mean_wait_h, &self.config.weights)
            }
            _ => pre.r_wait,
        };
        self.refresh()?;
        if self.candidates.is_empty() {
            return Err(EnvError::NoCandidates);
        }
        Ok(StepOutcome {
            candidate,
            state,
            placed: site,
            reward: RewardBreakdown::new(pre.r_pop, pre.r_exist, pre.r_sub, r_wait),
            sim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::test_scenario as minimal;
    use crate::rng::stream;
    use alloc::vec;

    fn w() -> RewardWeights {
        RewardWeights::default()
    }

    #[test]
    fn reward_worked_examples() {
        assert_eq!(reward_pop(50.0, 100.0, &w()).unwrap(), 5.0);
        assert_eq!(reward_pop(100.0, 100.0, &w()).unwrap(), 10.0);
        assert_eq!(reward_pop(0.0, 100.0, &w()).unwrap(), 0.0);
        assert!(reward_pop(1.0, 0.0, &w()).is_err());

        assert_eq!(reward_exist(0.5, &w(), ExistRewardForm::Prose), 0.0);
        assert_eq!(reward_exist(3.0, &w(), ExistRewardForm::Prose), 7.0);
        assert_eq!(reward_exist(12.0, &w(), ExistRewardForm::Prose), 0.0);
        assert_eq!(reward_exist(3.0, &w(), ExistRewardForm::Formula), 6.0);
        assert_eq!(reward_exist(0.5, &w(), ExistRewardForm::Formula), 8.5);

        assert_eq!(reward_sub(0.0, &w()), 10.0);
        assert_eq!(reward_sub(4.0, &w()), 6.0);
        assert_eq!(reward_sub(15.0, &w()), 0.0);

        assert_eq!(reward_wait(0.0, &w()), 10.0);
        assert_eq!(reward_wait(2.0, &w()), 5.0);
        assert_eq!(reward_wait(0.5, &w()), 10.0);
    }

    #[test]
    fn exist_and_wait_shapes() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let d = 1.0 + i as f64 * 0.1;
            let r = reward_exist(d, &w(), ExistRewardForm::Prose);
            assert!(r <= prev);
            prev = r;
        }
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let t = i as f64 * 0.05;
            let r = reward_wait(t, &w());
            assert!(r <= prev);
            if t <= 1.0 {
                assert_eq!(r, 10.0);
            }
            prev = r;
        }
    }

    #[test]
    fn observe_counts_and_falls_back() {
        let s = minimal();
        let c = Point::new(0.0, 0.0);
        let stations = [Point::new(0.5, 0.0), Point::new(1.5, 0.0), Point::new(0.0, 3.0)];
        let waits = WaitContext { station_waits: vec![1.0, 2.0, 9.0], system_mean: 4.0 };
        let st = observe(c, &stations, &s.substations, &s, &waits, &w()).unwrap();
        assert_eq!(st.n_stations, 2);
        assert_eq!(st.d_nearest, 0.5);
        assert_eq!(st.t_avg, 1.5);
        assert_eq!(st.d_nearest_sub, core::f64::consts::SQRT_2);

        let far = [Point::new(2.0, 2.0)];
        let waits = WaitContext { station_waits: vec![3.0], system_mean: 1.2 };
        let st = observe(c, &far, &s.substations, &s, &waits, &w()).unwrap();
        assert_eq!((st.n_stations, st.t_avg), (0, 1.2));

        let st = observe(far[0], &far, &s.substations, &s, &waits, &w()).unwrap();
        assert_eq!((st.d_nearest, st.n_stations), (0.0, 1));

        assert_eq!(observe(c, &[], &s.substations, &s, &waits, &w()), Err(EnvError::NoStations));
        assert_eq!(observe(c, &far, &[], &s, &waits, &w()), Err(EnvError::NoSubstations));
    }

    fn no_sim() -> EnvConfig {
        EnvConfig { simulate: false, ..Default::default() }
    }

    #[test]
    fn single_random_reset_is_seeded_and_yields_corners() {
        let s = minimal();
        let mut a = Environment::new(&s, no_sim()).unwrap();
        let mut b = Environment::new(&s, no_sim()).unwrap();
        a.reset(4).unwrap();
        b.reset(4).unwrap();
        assert_eq!(a.stations(), b.stations());
        assert_eq!(a.stations().len(), 1);
        assert_eq!(a.candidates().len(), 4);
        for c in a.candidates() {
            assert!((c.x == 0.0 || c.x == 2.0) && (c.y == 0.0 || c.y == 2.0));
        }
    }

    #[test]
    fn step_grows_the_station_set_and_uses_pre_state() {
        let s = minimal();
        let mut env = Environment::new(&s, no_sim()).unwrap();
        assert_eq!(env.step(Action { loc: 0, port: PortType::new(1).unwrap() }).unwrap_err(), EnvError::NotReset);
        env.reset(1).unwrap();
        let before = env.states()[1];
        let expected = env.static_reward(&before).unwrap();
        let out = env.step(Action { loc: 1, port: PortType::new(9).unwrap() }).unwrap();
        assert_eq!(env.stations().len(), 2);
        assert_eq!(out.reward, expected);
        assert_eq!(out.placed.port_count(), 4);
        assert!(out.sim.is_none());
        let err = env.step(Action { loc: 999, port: PortType::new(1).unwrap() }).unwrap_err();
        assert!(matches!(err, EnvError::InvalidAction { loc: 999, .. }));
    }

    #[test]
    fn existing_set_candidates_are_the_voronoi_vertices() {
        let s = minimal();
        let mut env = Environment::new(&s, EnvConfig { reset_mode: ResetMode::ExistingSet, ..no_sim() }).unwrap();
        env.reset(0).unwrap();
        let expected = candidates_for(&s.station_points(), s.domain, 0.05, s.coordinate_mode).unwrap();
        assert_eq!(env.candidates(), &expected[..]);
    }

    #[test]
    fn fuzzed_rewards_stay_in_range() {
        let s = minimal();
        let mut rng = stream(99, Stream::Synthetic);
        let env = Environment::new(&s, no_sim()).unwrap();
        for _ in 0..1000 {
            let st = StateVector {
                d_nearest: rng.gen_range(0.0..20.0),
                d_nearest_sub: rng.gen_range(0.0..20.0),
                rho: rng.gen_range(0.0..=100.0),
                n_stations: rng.gen_range(0..30),
                t_avg: rng.gen_range(0.0..10.0),
            };
            let r = env.static_reward(&st).unwrap();
            for c in [r.r_pop, r.r_exist, r.r_sub, r.r_wait] {
                assert!((0.0..=10.0).contains(&c));
            }
            assert!((0.0..=40.0).contains(&r.total));
        }
    }

    #[test]
    fn simulated_step_reports_post_placement_wait() {
        let s = minimal();
        let cfg = EnvConfig {
            reset_mode: ResetMode::ExistingSet,
            sim: SimulationConfig { duration_h: 2.0, ..Default::default() },
            ..Default::default()
        };
        let mut env = Environment::new(&s, cfg).unwrap();
        env.reset(0).unwrap();
        let out = env.step(Action { loc: 0, port: PortType::new(5).unwrap() }).unwrap();
        let sim = out.sim.unwrap();
        assert_eq!(out.reward.r_wait, reward_wait(sim.system_mean_wait_h, &RewardWeights::default()));
        assert_eq!(env.waits().station_waits.len(), 2);
    }
}
