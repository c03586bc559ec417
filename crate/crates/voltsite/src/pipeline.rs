//! Evaluation fan-out: simulate station sets over seed sets and tabulate
//! the comparison between placement methods.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use voltsite_core::baselines::run_baseline;
use voltsite_core::dqn::{greedy_rollout, Agent};
use voltsite_core::env::{EnvConfig, Environment, PlacementPlan, ResetMode, TraceRow};
use voltsite_core::geo::{Point, Scenario, StationSite};
use voltsite_core::metrics::{cssi, gap, mean_proximity, median};
use voltsite_core::ports::PortCatalog;
use voltsite_core::rng::derive_seed;
use voltsite_core::sim::{run, SimulationConfig, SimulationResult};

use crate::config::{MethodName, RunConfig};
use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "VOLTSITE_THREADS";

/// A pool capped by `VOLTSITE_THREADS` when set, else rayon's default.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(Error::runtime)
}

/// Consecutive simulation seeds starting at `base`.
pub fn seed_range(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base.wrapping_add(i)).collect()
}

/// One simulation per seed, run concurrently; results keep seed order.
pub fn simulate_seeds(
    pool: &rayon::ThreadPool,
    scenario: &Scenario,
    stations: &[StationSite],
    config: &SimulationConfig,
    seeds: &[u64],
) -> Result<Vec<SimulationResult>> {
    pool.install(|| {
        seeds
            .par_iter()
            .map(|s| run(scenario, stations, config, *s).map_err(Error::runtime))
            .collect()
    })
}

/// The on-disk form of a placement plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub method: String,
    pub seed: u64,
    pub initial: Vec<StationSite>,
    pub added: Vec<StationSite>,
    #[serde(default)]
    pub trace: Vec<TraceRow>,
}

impl PlanFile {
    pub fn new(plan: PlacementPlan, seed: u64) -> Self {
        PlanFile { method: plan.method, seed, initial: plan.initial, added: plan.added, trace: plan.trace }
    }

    pub fn all_stations(&self) -> Vec<StationSite> {
        self.initial.iter().chain(&self.added).cloned().collect()
    }
}

/// Greedy placement of `k` stations by a trained agent, starting from the
/// scenario's own stations.
pub fn agent_plan(agent: &Agent, scenario: &Scenario, env: &EnvConfig, k: usize, seed: u64) -> Result<PlacementPlan> {
    let config = EnvConfig { reset_mode: ResetMode::ExistingSet, ..env.clone() };
    let mut env = Environment::new(scenario, config).map_err(Error::runtime)?;
    let mut plan = greedy_rollout(agent, &mut env, k, derive_seed(seed, u64::MAX)).map_err(Error::runtime)?;
    plan.method = "agent".into();
    Ok(plan)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: String,
    pub k: usize,
    pub mean_wait_h: f64,
    pub median_wait_h: f64,
    /// Gap of `mean_wait_h` against the original set's mean wait.
    pub gap_percent: Option<f64>,
    pub proximity_km: Option<f64>,
    pub cssi: f64,
    pub mean_stranded: f64,
    /// One system mean wait per simulation seed, in seed order.
    pub waits_h: Vec<f64>,
}

/// Flat CSV view of a row.
#[derive(Debug, Serialize)]
pub struct CompareCsvRow<'a> {
    pub method: &'a str,
    pub k: usize,
    pub mean_wait_h: f64,
    pub median_wait_h: f64,
    pub gap_percent: Option<f64>,
    pub proximity_km: Option<f64>,
    pub cssi: f64,
    pub mean_stranded: f64,
}

impl CompareRow {
    pub fn csv(&self) -> CompareCsvRow<'_> {
        CompareCsvRow {
            method: &self.method,
            k: self.k,
            mean_wait_h: self.mean_wait_h,
            median_wait_h: self.median_wait_h,
            gap_percent: self.gap_percent,
            proximity_km: self.proximity_km,
            cssi: self.cssi,
            mean_stranded: self.mean_stranded,
        }
    }
}

struct Job {
    method: String,
    k: usize,
    added: Vec<StationSite>,
}

/// Builds every (method, k) station set, simulates each over `seeds` and
/// tabulates. `agent` is required when the methods include the agent.
pub fn compare(
    pool: &rayon::ThreadPool,
    scenario: &Scenario,
    config: &RunConfig,
    seeds: &[u64],
    agent: Option<&Agent>,
) -> Result<Vec<CompareRow>> {
    let initial = &scenario.existing_stations;
    let k_max = config.eval.k.iter().copied().max().unwrap_or(0);
    let mut jobs = vec![Job { method: "original".into(), k: 0, added: Vec::new() }];
    for method in &config.eval.methods {
        match method {
            MethodName::Original => {}
            MethodName::Agent => {
                let agent = agent.ok_or_else(|| Error::Usage("the agent method needs --checkpoint".into()))?;
                // Rollouts are sequential, so each k is a prefix of the longest.
                let plan = agent_plan(agent, scenario, &config.env, k_max, config.seed)?;
                for k in &config.eval.k {
                    jobs.push(Job { method: plan.method.clone(), k: *k, added: plan.added[..*k].to_vec() });
                }
            }
            m => {
                let base = m.baseline().expect("static method");
                for k in &config.eval.k {
                    let plan = run_baseline(scenario, initial, base, config.eval.ports, *k, config.seed, &config.env)
                        .map_err(Error::runtime)?;
                    jobs.push(Job { method: plan.method, k: *k, added: plan.added });
                }
            }
        }
    }

    let sim = SimulationConfig { record_events: false, ..config.env.sim.clone() };
    let waits: Vec<Vec<(f64, usize)>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let stations: Vec<StationSite> = initial.iter().chain(&job.added).cloned().collect();
                seeds
                    .par_iter()
                    .map(|s| {
                        let r = run(scenario, &stations, &sim, *s).map_err(Error::runtime)?;
                        Ok((r.system_mean_wait_h, r.stranded))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let catalog = PortCatalog::default();
    let original_mean = mean(waits[0].iter().map(|w| w.0));
    let old_points: Vec<Point> = initial.iter().map(StationSite::location).collect();
    jobs.iter()
        .zip(&waits)
        .map(|(job, w)| {
            let per_seed: Vec<f64> = w.iter().map(|x| x.0).collect();
            let mean_wait_h = mean(per_seed.iter().copied());
            let all: Vec<StationSite> = initial.iter().chain(&job.added).cloned().collect();
            let new_points: Vec<Point> = job.added.iter().map(StationSite::location).collect();
            Ok(CompareRow {
                method: job.method.clone(),
                k: job.k,
                mean_wait_h,
                median_wait_h: median(&per_seed).unwrap_or(f64::NAN),
                gap_percent: gap(original_mean, mean_wait_h).ok(),
                proximity_km: if new_points.is_empty() || old_points.is_empty() {
                    None
                } else {
                    mean_proximity(&new_points, &old_points, scenario.coordinate_mode).ok()
                },
                cssi: cssi(&all, &catalog).unwrap_or(0.0),
                mean_stranded: mean(w.iter().map(|x| x.1 as f64)),
                waits_h: per_seed,
            })
        })
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}
