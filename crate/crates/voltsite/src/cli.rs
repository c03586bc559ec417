//! Command-line interface. Every command writes into `--out` and leaves a
//! `manifest.json` there.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use voltsite_core::baselines::PortStrategy;
use voltsite_core::dqn::{greedy_rollout, Trainer};
use voltsite_core::env::Environment;
use voltsite_core::geo::{generate_synthetic, GeoError, Scenario, StationSite};
use voltsite_core::metrics::{build_report, median, MetricsReport};
use voltsite_core::rng::derive_seed;
use voltsite_core::sim::{SimulationConfig, SimulationResult};

use crate::config::{resolve, MethodName, Overrides, Profile, RunConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::manifest::RunManifest;
use crate::pipeline::{self, PlanFile};
use crate::svg::{self, MapStation, Series};

#[derive(Debug, Parser)]
#[command(name = "voltsite", version, about = "EV charging-station siting with Voronoi candidates and a dual Q-network")]
pub struct Cli {
    /// JSON run config; flags override it, it overrides profile defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed for generation, simulation and training.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum)]
    pub profile: Option<Profile>,
    /// Skip simulation inside the environment (deterministic rewards only).
    #[arg(long, global = true)]
    pub no_sim: bool,
    /// Write per-seed event-log CSVs from `simulate`.
    #[arg(long, global = true)]
    pub emit_events: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    /// Scenario JSON; generated from the profile and seed when omitted.
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scenario.
    Generate,
    /// Simulate a station set over one or more seeds.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Placement plan whose stations replace the scenario's.
        #[arg(long, value_name = "FILE")]
        plan: Option<PathBuf>,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
    },
    /// Train the agent and roll out its greedy placement.
    Train {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        /// Continue from a training checkpoint up to --episodes.
        #[arg(long, value_name = "FILE")]
        resume: Option<PathBuf>,
    },
    /// Greedy placement from a training checkpoint, starting at the scenario's stations.
    Place {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Stations to add; defaults to the training steps per episode.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Compare placement methods over station counts and seeds.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Station counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', value_enum)]
        methods: Option<Vec<MethodName>>,
        #[arg(long, value_enum)]
        ports: Option<PortArg>,
        /// Simulation seeds per station set.
        #[arg(long)]
        seeds: Option<usize>,
        /// Training checkpoint for the agent method.
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,
    },
    /// Metrics, station table, map and wait-vs-count chart for one plan.
    Report {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, value_name = "FILE")]
        plan: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PortArg {
    Random,
    Density,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Simulate { .. } => "simulate",
            Command::Train { .. } => "train",
            Command::Place { .. } => "place",
            Command::Compare { .. } => "compare",
            Command::Report { .. } => "report",
        }
    }
}

/// Parses `args` and runs the command, mapping failures to exit codes.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(Error::EXIT_USAGE));
        }
    };
    let argv = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    let flags = Overrides { profile: cli.profile, seed: cli.seed, no_sim: cli.no_sim };
    let mut cfg = resolve(cli.config.as_deref(), &flags)?;
    if let Command::Train { episodes, steps, .. } = &cli.command {
        if let Some(e) = episodes {
            cfg.train.episodes = *e;
        }
        if let Some(s) = steps {
            cfg.train.steps_per_episode = *s;
        }
    }
    if let Command::Compare { k, methods, ports, seeds, .. } = &cli.command {
        if let Some(k) = k {
            cfg.eval.k = k.clone();
        }
        if let Some(m) = methods {
            cfg.eval.methods = m.clone();
        }
        if let Some(p) = ports {
            cfg.eval.ports = match p {
                PortArg::Random => PortStrategy::Random,
                PortArg::Density => PortStrategy::Density,
            };
        }
        if let Some(n) = seeds {
            cfg.eval.sim_seeds = *n;
        }
    }
    cfg.validate()?;

    let mut m = RunManifest::new(cli.command.name(), argv, cli.config.as_deref(), &cli.out, cfg.clone());
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    match &cli.command {
        Command::Generate => generate(&cfg, &mut m)?,
        Command::Simulate { scenario, plan, seeds } => {
            simulate(&cfg, &mut m, scenario, plan.as_deref(), *seeds, cli.emit_events)?
        }
        Command::Train { scenario, resume, .. } => train(&cfg, &mut m, scenario, resume.as_deref())?,
        Command::Place { scenario, checkpoint, k } => place(&cfg, &mut m, scenario, checkpoint, *k)?,
        Command::Compare { scenario, checkpoint, .. } => compare(&cfg, &mut m, scenario, checkpoint.as_deref())?,
        Command::Report { scenario, plan } => report(&cfg, &mut m, scenario, plan.as_deref())?,
    }
    m.write()
}

fn generated(cfg: &RunConfig) -> Result<Scenario> {
    generate_synthetic(&cfg.synth, cfg.seed).map_err(|e| match e {
        GeoError::Validation { path, message } => {
            Error::Config { file: "<resolved>".into(), path: format!("synth.{path}"), message }
        }
        other => Error::runtime(other),
    })
}

fn scenario_for(cfg: &RunConfig, m: &mut RunManifest, arg: &ScenarioArg) -> Result<Scenario> {
    match &arg.scenario {
        Some(path) => {
            m.input(path);
            io::load_scenario(path)
        }
        None => m.time("generate", || generated(cfg)),
    }
}

fn load_trainer(m: &mut RunManifest, path: &Path) -> Result<Trainer> {
    m.input(path);
    let trainer: Trainer = io::load_json(path)?;
    trainer.config.validate().map_err(|e| Error::Validation { file: path.display().to_string(), message: e.to_string() })?;
    Ok(trainer)
}

fn generate(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let scenario = m.time("generate", || generated(cfg))?;
    m.seeds = vec![cfg.seed];
    m.emit_json("scenario.json", &scenario)
}

#[derive(Serialize)]
struct Aggregate {
    seeds: Vec<u64>,
    wait_h: Vec<f64>,
    mean_wait_h: f64,
    median_wait_h: f64,
    reports: Vec<MetricsReport>,
}

fn simulate(
    cfg: &RunConfig,
    m: &mut RunManifest,
    arg: &ScenarioArg,
    plan: Option<&Path>,
    n_seeds: usize,
    emit_events: bool,
) -> Result<()> {
    if n_seeds == 0 {
        return Err(Error::Usage("--seeds must be >= 1".into()));
    }
    let scenario = scenario_for(cfg, m, arg)?;
    let (initial, added, label) = match plan {
        Some(p) => {
            m.input(p);
            let plan: PlanFile = io::load_json(p)?;
            (plan.initial, plan.added, plan.method)
        }
        None => (scenario.existing_stations.clone(), Vec::new(), "original".to_string()),
    };
    let stations: Vec<StationSite> = initial.iter().chain(&added).cloned().collect();
    let seeds = pipeline::seed_range(cfg.seed, n_seeds);
    m.seeds = seeds.clone();
    let sim = SimulationConfig { record_events: emit_events, ..cfg.env.sim.clone() };
    let pool = pipeline::thread_pool()?;
    let results = m.time("simulate", || pipeline::simulate_seeds(&pool, &scenario, &stations, &sim, &seeds))?;

    let mut reports = Vec::with_capacity(results.len());
    for (seed, mut r) in seeds.iter().zip(results) {
        if emit_events {
            let path = m.emitted(&format!("events_{seed}.csv"));
            io::write_events_csv(&path, &r.events, &stations)?;
        }
        // The event log lives in the CSV; the JSON keeps the aggregates.
        r.events.clear();
        reports.push(
            build_report(&label, *seed, &initial, &added, &r, None, scenario.coordinate_mode).map_err(Error::runtime)?,
        );
        m.emit_json(&format!("result_{seed}.json"), &r)?;
    }
    let wait_h: Vec<f64> = reports.iter().map(|r| r.wait_h.unwrap_or(0.0)).collect();
    let agg = Aggregate {
        seeds,
        mean_wait_h: wait_h.iter().sum::<f64>() / wait_h.len() as f64,
        median_wait_h: median(&wait_h).unwrap_or(0.0),
        wait_h,
        reports,
    };
    m.emit_json("aggregate.json", &agg)
}

#[derive(Serialize)]
struct EpisodeRow {
    episode: usize,
    reward: f64,
}

fn train(cfg: &RunConfig, m: &mut RunManifest, arg: &ScenarioArg, resume: Option<&Path>) -> Result<()> {
    let scenario = scenario_for(cfg, m, arg)?;
    let mut env = Environment::new(&scenario, cfg.env.clone()).map_err(Error::runtime)?;
    let mut trainer = match resume {
        Some(p) => {
            let mut t = load_trainer(m, p)?;
            t.config.episodes = cfg.train.episodes;
            t
        }
        None => Trainer::new(cfg.train.clone()).map_err(Error::runtime)?,
    };
    m.seeds = vec![trainer.config.seed];
    m.time("train", || trainer.train(&mut env)).map_err(Error::runtime)?;
    let steps = trainer.config.steps_per_episode;
    let plan = m
        .time("rollout", || greedy_rollout(&trainer.agent, &mut env, steps, derive_seed(trainer.config.seed, u64::MAX)))
        .map_err(Error::runtime)?;

    m.emit_json("checkpoint.json", &trainer)?;
    let h = &trainer.history;
    io::write_history_csv(&m.emitted("history.csv"), h)?;
    let episodes: Vec<EpisodeRow> =
        h.episode_rewards.iter().enumerate().map(|(episode, reward)| EpisodeRow { episode, reward: *reward }).collect();
    io::write_csv(&m.emitted("episodes.csv"), &episodes)?;
    io::write_trace_csv(&m.emitted("trace.csv"), &plan.trace)?;
    m.emit_json("plan.json", &PlanFile::new(plan, trainer.config.seed))?;

    let window = (h.episode_rewards.len() / 10).max(1);
    let indexed = |v: &[f64]| v.iter().enumerate().map(|(i, y)| (i as f64, *y)).collect::<Vec<_>>();
    let reward_svg = svg::line_chart(
        "Episode reward",
        "episode",
        "total reward",
        &[
            Series { name: "reward".into(), points: indexed(&h.episode_rewards) },
            Series {
                name: format!("moving average ({window})"),
                points: indexed(&svg::moving_average(&h.episode_rewards, window)),
            },
        ],
    );
    m.emit_text("reward.svg", &reward_svg)?;
    let loss = |f: fn(&voltsite_core::dqn::StepRecord) -> Option<f64>| {
        let pts: Vec<(f64, f64)> =
            h.steps.iter().filter_map(|s| f(s).map(|l| (s.global_step as f64, l))).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let smooth = svg::moving_average(&ys, (ys.len() / 20).max(1));
        pts.iter().zip(smooth).map(|(p, y)| (p.0, y)).collect::<Vec<_>>()
    };
    let loss_svg = svg::line_chart(
        "Training loss (moving average)",
        "step",
        "TD loss",
        &[
            Series { name: "location".into(), points: loss(|s| s.loss_loc) },
            Series { name: "port".into(), points: loss(|s| s.loss_port) },
        ],
    );
    m.emit_text("loss.svg", &loss_svg)
}

fn place(cfg: &RunConfig, m: &mut RunManifest, arg: &ScenarioArg, checkpoint: &Path, k: Option<usize>) -> Result<()> {
    let scenario = scenario_for(cfg, m, arg)?;
    let trainer = load_trainer(m, checkpoint)?;
    let k = k.unwrap_or(trainer.config.steps_per_episode);
    m.seeds = vec![cfg.seed];
    let plan = m.time("rollout", || pipeline::agent_plan(&trainer.agent, &scenario, &cfg.env, k, cfg.seed))?;
    io::write_trace_csv(&m.emitted("trace.csv"), &plan.trace)?;
    m.emit_json("plan.json", &PlanFile::new(plan, cfg.seed))
}

fn compare(cfg: &RunConfig, m: &mut RunManifest, arg: &ScenarioArg, checkpoint: Option<&Path>) -> Result<()> {
    let scenario = scenario_for(cfg, m, arg)?;
    let trainer = checkpoint.map(|p| load_trainer(m, p)).transpose()?;
    let seeds = pipeline::seed_range(cfg.seed, cfg.eval.sim_seeds);
    m.seeds = seeds.clone();
    let pool = pipeline::thread_pool()?;
    let rows = m.time("compare", || {
        pipeline::compare(&pool, &scenario, cfg, &seeds, trainer.as_ref().map(|t| &t.agent))
    })?;
    m.emit_json("compare.json", &rows)?;
    let csv_rows: Vec<_> = rows.iter().map(|r| r.csv()).collect();
    io::write_csv(&m.emitted("compare.csv"), &csv_rows)?;

    let original = rows[0].mean_wait_h;
    let mut series: Vec<Series> = Vec::new();
    for r in &rows[1..] {
        match series.iter_mut().find(|s| s.name == r.method) {
            Some(s) => s.points.push((r.k as f64, r.mean_wait_h)),
            None => series.push(Series { name: r.method.clone(), points: vec![(0.0, original), (r.k as f64, r.mean_wait_h)] }),
        }
    }
    let chart = svg::line_chart("Mean wait vs stations added", "stations added", "mean wait (h)", &series);
    m.emit_text("trend.svg", &chart)
}

#[derive(Serialize)]
struct CountRow {
    added: usize,
    wait_h: f64,
}

fn report(cfg: &RunConfig, m: &mut RunManifest, arg: &ScenarioArg, plan: Option<&Path>) -> Result<()> {
    let scenario = scenario_for(cfg, m, arg)?;
    let plan = match plan {
        Some(p) => {
            m.input(p);
            io::load_json::<PlanFile>(p)?
        }
        None => PlanFile {
            method: "original".into(),
            seed: cfg.seed,
            initial: scenario.existing_stations.clone(),
            added: Vec::new(),
            trace: Vec::new(),
        },
    };
    m.seeds = vec![cfg.seed];
    let pool = pipeline::thread_pool()?;
    let sim = SimulationConfig { record_events: false, ..cfg.env.sim.clone() };
    // Prefixes of the plan give the wait-vs-count curve; the last is the full plan.
    let results: Vec<SimulationResult> = m.time("simulate", || {
        (0..=plan.added.len())
            .map(|n| {
                let st: Vec<StationSite> = plan.initial.iter().chain(&plan.added[..n]).cloned().collect();
                pipeline::simulate_seeds(&pool, &scenario, &st, &sim, &[cfg.seed]).map(|mut v| v.remove(0))
            })
            .collect::<Result<_>>()
    })?;
    let base = results[0].system_mean_wait_h;
    let last = results.last().expect("at least the initial set");
    let rep = build_report(
        &plan.method,
        cfg.seed,
        &plan.initial,
        &plan.added,
        last,
        (base > 0.0).then_some(base),
        scenario.coordinate_mode,
    )
    .map_err(Error::runtime)?;
    m.emit_json("report.json", &rep)?;
    io::write_station_csv(&m.emitted("stations.csv"), &rep)?;

    let markers: Vec<MapStation> = rep
        .stations
        .iter()
        .enumerate()
        .map(|(i, s)| MapStation {
            id: s.id.clone(),
            location: voltsite_core::Point::new(s.x, s.y),
            wait_h: s.mean_wait_h,
            added: i >= plan.initial.len(),
        })
        .collect();
    let map = svg::station_map("Mean wait per station", scenario.domain, &markers, &scenario.substations);
    m.emit_text("map.svg", &map)?;

    let counts: Vec<CountRow> =
        results.iter().enumerate().map(|(added, r)| CountRow { added, wait_h: r.system_mean_wait_h }).collect();
    io::write_csv(&m.emitted("wait_vs_count.csv"), &counts)?;
    let chart = svg::line_chart(
        "System mean wait vs stations added",
        "stations added",
        "mean wait (h)",
        &[Series { name: plan.method.clone(), points: counts.iter().map(|c| (c.added as f64, c.wait_h)).collect() }],
    );
    m.emit_text("wait_vs_count.svg", &chart)
}
