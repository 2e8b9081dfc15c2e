use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{write_json, CliResult};
use crate::ode::IntegratorConfig;
use crate::systems::SystemTag;

/// Version tag carried by every JSON output.
pub const SCHEMA: &str = "hessode/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

/// What a run did and with which settings; enough to repeat it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub subcommand: String,
    /// Full command line, program name first.
    pub argv: Vec<String>,
    pub system: Option<SystemTag>,
    pub dim: Option<usize>,
    pub y0: Option<Vec<f64>>,
    pub t_final: Option<f64>,
    pub integrator: Option<IntegratorConfig>,
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub phases: Vec<Phase>,
}

impl RunManifest {
    pub fn new(subcommand: &str, argv: &[String]) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            argv: argv.to_vec(),
            system: None,
            dim: None,
            y0: None,
            t_final: None,
            integrator: None,
            method: None,
            seed: None,
            phases: Vec::new(),
        }
    }

    /// Runs `f` and records its wall time under `name`.
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let r = f();
        self.phases.push(Phase {
            name: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        r
    }

    /// `out.json` → `out.json.manifest.json`
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn write_beside(&self, output: &Path) -> CliResult<PathBuf> {
        let path = Self::path_for(output);
        write_json(&path, self)?;
        Ok(path)
    }
}
