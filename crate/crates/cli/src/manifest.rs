//! Run manifests: everything needed to repeat a run.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Verdict tolerance override; `None` picks per verdict from the inputs.
    pub verdict: Option<f64>,
    pub exact: f64,
    pub quadrature: f64,
}

impl Tolerances {
    pub fn new(verdict: Option<f64>) -> Self {
        Self {
            verdict,
            exact: lcnorm::inequality::EXACT_TOL,
            quadrature: lcnorm::inequality::QUADRATURE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest<C> {
    pub schema_version: u32,
    pub tool_version: String,
    pub timestamp: String,
    pub command: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Command-specific inputs: densities or generator settings, grids, claims.
    pub inputs: C,
}

impl<C: Serialize + DeserializeOwned> RunManifest<C> {
    pub fn new(command: &str, seed: u64, tol: Option<f64>, inputs: C) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: command.to_string(),
            seed,
            tolerances: Tolerances::new(tol),
            inputs,
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Json {
            context: "serializing manifest".into(),
            source: e,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path, command: &str) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| CliError::Json {
            context: format!("reading manifest {}", path.display()),
            source: e,
        })?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::usage(format!(
                "manifest schema version {} is not supported (expected {SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        if m.command != command {
            return Err(CliError::usage(format!(
                "manifest was written by `{}`, not `{command}`",
                m.command
            )));
        }
        Ok(m)
    }
}
