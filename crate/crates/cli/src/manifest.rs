//! Every command leaves a manifest next to its outputs: the parameters that
//! reproduce the run bit for bit with the same binary, plus bookkeeping
//! like wall-clock time and headline numbers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub label: Option<String>,
    pub seed: u64,
    pub x_max: Option<i64>,
    /// Twist, draw and kept-sample counts by name.
    pub counts: BTreeMap<String, u64>,
    pub tolerances: BTreeMap<String, f64>,
    /// Mode flags: method, comparison mode, ensemble, RNG identification.
    pub modes: BTreeMap<String, String>,
    /// Headline scalars: kappa, reference discriminant, argmin, means.
    pub numbers: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        let mut modes = BTreeMap::new();
        modes.insert(
            "rng".into(),
            "chacha8 seeded from --seed, one stream per draw index, ziggurat normals".into(),
        );
        RunManifest {
            command: command.into(),
            label: None,
            seed: 0,
            x_max: None,
            counts: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            modes,
            numbers: BTreeMap::new(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("manifest-{}.json", self.command));
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}
