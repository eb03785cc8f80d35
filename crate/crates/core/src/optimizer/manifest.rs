use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{OptimConfig, OptimResult, RelaxSpec};
use crate::dsl::Params;

/// Hex SHA-256 of the program source.
pub fn program_hash(src: &str) -> String {
    hex::encode(Sha256::digest(src.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub constraint_error: f64,
    pub final_total: f64,
}

/// Everything needed to reproduce a run and check its reported numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub program_name: String,
    pub program_hash: String,
    pub source: String,
    /// Parameter overrides on top of the program defaults.
    pub params: Params,
    pub prior: String,
    pub frames: usize,
    pub fps: f64,
    /// Free-text description; no shipped prior reads it.
    pub text: Option<String>,
    pub seed: u64,
    pub config: OptimConfig,
    pub relax: RelaxSpec,
    pub restarts: Vec<RestartSummary>,
    /// Index into `restarts` of the exported run.
    pub restart_chosen: usize,
    pub metrics: BTreeMap<String, f64>,
    pub success: Option<bool>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(
        program_name: &str,
        source: &str,
        prior: &str,
        config: &OptimConfig,
        relax: &RelaxSpec,
        result: &OptimResult,
    ) -> Self {
        Self {
            program_name: program_name.to_owned(),
            program_hash: program_hash(source),
            source: source.to_owned(),
            params: Params::new(),
            prior: prior.to_owned(),
            frames: result.motion().frame_count(),
            fps: result.motion().fps,
            text: None,
            seed: config.seed,
            config: config.clone(),
            relax: relax.clone(),
            restarts: result
                .runs
                .iter()
                .map(|r| RestartSummary {
                    seed: r.seed,
                    constraint_error: r.constraint_error,
                    final_total: r.trace.last().map_or(f64::NAN, |e| e.total),
                })
                .collect(),
            restart_chosen: result.chosen,
            metrics: BTreeMap::new(),
            success: None,
            wall_time_s: result.wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
