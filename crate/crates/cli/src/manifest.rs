//! Run manifest written next to every run's artifacts as `manifest.json`.

use std::collections::BTreeMap;
use std::path::Path;

use nsalpha_core::adjoint::CostKind;
use nsalpha_core::optimizer::{AdmissibleSet, CostWeights, IterationRecord};
use nsalpha_core::{PhysicalParams, TimeScheme};
use serde::{Deserialize, Serialize};

use crate::config::MeshConfig;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    /// Simulation or verification ran to the end.
    Completed,
    /// The optimizer met its tolerance.
    Converged,
    /// The optimizer hit `max_iters` first.
    MaxIters,
    /// The Armijo search exhausted its halvings.
    Stagnated,
    /// Some sweep rows did not converge.
    Partial,
    /// At least one verification check failed.
    Failed,
}

/// Wall-clock timings in seconds; the only nondeterministic part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub phases: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub seed: u64,
    pub mesh: MeshConfig,
    pub params: PhysicalParams,
    pub scheme: TimeScheme,
    pub cost: CostKind,
    pub weights: CostWeights,
    pub set: AdmissibleSet,
    pub status: RunStatus,
    /// Optimizer history; empty outside `optimize`.
    pub iterations: Vec<IterationRecord>,
    /// Mode-specific scalar results.
    pub summary: BTreeMap<String, f64>,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
    pub timings: Timings,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest values are finite");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
