//! Run configuration: one JSON file per run, layered over profile defaults
//! and overridden by command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use voltsite_core::baselines::{Method, PortStrategy};
use voltsite_core::dqn::TrainConfig;
use voltsite_core::env::EnvConfig;
use voltsite_core::geo::SynthConfig;

use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 4 km x 4 km, 200 vehicles, 6 stations.
    #[default]
    Desk,
    /// 10 km x 8 km, 3000 vehicles, 30 stations.
    Paper,
}

/// A placement method as named in comparison tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    /// The scenario's own stations, nothing added.
    Original,
    #[value(alias = "voronoi_greedy")]
    VoronoiGreedy,
    Radial,
    Probabilistic,
    /// Greedy rollout of a trained agent.
    Agent,
}

impl MethodName {
    pub fn baseline(self) -> Option<Method> {
        match self {
            MethodName::VoronoiGreedy => Some(Method::VoronoiGreedy),
            MethodName::Radial => Some(Method::Radial),
            MethodName::Probabilistic => Some(Method::Probabilistic),
            MethodName::Original | MethodName::Agent => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Station counts to add in `compare`.
    pub k: Vec<usize>,
    pub methods: Vec<MethodName>,
    /// Port assignment for the static baselines.
    pub ports: PortStrategy,
    /// Simulation seeds per evaluated station set.
    pub sim_seeds: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: (1..=6).collect(),
            methods: vec![
                MethodName::Original,
                MethodName::VoronoiGreedy,
                MethodName::Radial,
                MethodName::Probabilistic,
            ],
            ports: PortStrategy::Random,
            sim_seeds: 5,
        }
    }
}

/// Everything a command needs. `seed` drives scenario generation,
/// simulation and training; the nested `train.seed` and `env.sim.seed` are
/// overwritten with it on resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Profile,
    pub seed: u64,
    pub synth: SynthConfig,
    pub env: EnvConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let synth = match profile {
            Profile::Desk => SynthConfig::desk(),
            Profile::Paper => SynthConfig::paper(),
        };
        RunConfig {
            profile,
            seed: 0,
            synth,
            env: EnvConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }

    fn sync_seeds(&mut self) {
        self.train.seed = self.seed;
        self.env.sim.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, e: &dyn std::fmt::Display| Error::Config {
            file: "<resolved>".into(),
            path: path.into(),
            message: e.to_string(),
        };
        self.env.validate().map_err(|e| bad("env", &e))?;
        self.train.validate().map_err(|e| bad("train", &e))?;
        if self.eval.sim_seeds == 0 {
            return Err(bad("eval.sim_seeds", &"must be >= 1"));
        }
        if self.eval.k.iter().any(|k| *k == 0) {
            return Err(bad("eval.k", &"station counts must be >= 1"));
        }
        Ok(())
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub profile: Option<Profile>,
    pub seed: Option<u64>,
    pub no_sim: bool,
}

/// Builds the effective config: profile defaults, then the file, then flags.
pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<RunConfig> {
    let name = file.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string());
    let cfg_err = |path: String, message: String| Error::Config { file: name.clone(), path, message };

    let from_file = match file {
        Some(p) => io::read_json::<Value>(p)?.map_err(|e| cfg_err(e.path, e.message))?,
        None => Value::Object(Default::default()),
    };
    if !from_file.is_object() {
        return Err(cfg_err(".".into(), "config must be a JSON object".into()));
    }
    let file_profile = match from_file.get("profile") {
        Some(v) => Some(Profile::deserialize(v).map_err(|e| cfg_err("profile".into(), e.to_string()))?),
        None => None,
    };
    let profile = flags.profile.or(file_profile).unwrap_or_default();

    let mut merged = serde_json::to_value(RunConfig::for_profile(profile)).map_err(Error::runtime)?;
    merge(&mut merged, from_file);
    let mut cfg: RunConfig =
        serde_path_to_error::deserialize(merged).map_err(|e| cfg_err(e.path().to_string(), e.into_inner().to_string()))?;

    cfg.profile = profile;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if flags.no_sim {
        cfg.env.simulate = false;
    }
    cfg.sync_seeds();
    cfg.validate().map_err(|e| match e {
        Error::Config { path, message, .. } => cfg_err(path, message),
        other => other,
    })?;
    Ok(cfg)
}

/// Objects merge key by key; anything else in `overlay` replaces `base`.
fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_is_deep_for_objects_only() {
        let mut a = json!({"x": {"y": 1, "z": [1, 2]}, "w": 3});
        merge(&mut a, json!({"x": {"z": [9]}, "v": 4}));
        assert_eq!(a, json!({"x": {"y": 1, "z": [9]}, "w": 3, "v": 4}));
    }

    #[test]
    fn defaults_resolve_and_round_trip() {
        let cfg = resolve(None, &Overrides::default()).unwrap();
        assert_eq!(cfg.profile, Profile::Desk);
        assert_eq!(cfg.synth, SynthConfig::desk());
        let back: RunConfig = serde_json::from_value(serde_json::to_value(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
