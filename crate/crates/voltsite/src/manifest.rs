use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::io;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// Written once per output directory. Together with the listed inputs it is
/// enough to rerun the command and get the same outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config_path: Option<String>,
    /// Input files other than the config (scenario, plan, checkpoint).
    pub inputs: Vec<String>,
    pub seeds: Vec<u64>,
    pub out_dir: String,
    pub version: String,
    /// The fully resolved config, flags applied.
    pub config: RunConfig,
    pub outputs: Vec<String>,
    pub timings: Vec<Timing>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, config_path: Option<&Path>, out_dir: &Path, config: RunConfig) -> Self {
        RunManifest {
            command: command.into(),
            argv,
            config_path: config_path.map(|p| p.display().to_string()),
            inputs: Vec::new(),
            seeds: Vec::new(),
            out_dir: out_dir.display().to_string(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            outputs: Vec::new(),
            timings: Vec::new(),
        }
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(Timing { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    /// Writes JSON into the output directory and lists it.
    pub fn emit_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        io::write_json(&Path::new(&self.out_dir).join(name), value)?;
        self.outputs.push(name.into());
        Ok(())
    }

    pub fn emit_text(&mut self, name: &str, text: &str) -> Result<()> {
        io::write_text(&Path::new(&self.out_dir).join(name), text)?;
        self.outputs.push(name.into());
        Ok(())
    }

    /// Lists a file some other writer produced in the output directory.
    pub fn emitted(&mut self, name: &str) -> std::path::PathBuf {
        self.outputs.push(name.into());
        Path::new(&self.out_dir).join(name)
    }

    pub fn write(&self) -> Result<()> {
        io::write_json(&Path::new(&self.out_dir).join(MANIFEST_FILE), self)
    }
}
