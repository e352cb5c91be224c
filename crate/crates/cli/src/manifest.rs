//! Run manifests: everything needed to rerun a fit and locate its outputs.

use std::path::{Path, PathBuf};

use mcqr::data::RunConfig;
use mcqr::gibbs::ChainStats;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_at, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub chain_id: usize,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub d_stalls: Vec<u64>,
    pub d_proposals: u64,
    pub ystar_clamps: u64,
    pub gig_proposals: u64,
    pub gig_draws: u64,
}

impl ChainRecord {
    pub fn new(chain_id: usize, path: PathBuf, stats: &ChainStats) -> Self {
        Self {
            chain_id,
            path,
            d_stalls: stats.d_stalls.clone(),
            d_proposals: stats.d_proposals,
            ystar_clamps: stats.ystar_clamps,
            gig_proposals: stats.gig_proposals,
            gig_draws: stats.gig_draws,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub tau: f64,
    pub chains: Vec<ChainRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the embedded config serialized as compact JSON.
    pub config_hash: String,
    pub seed: u64,
    pub taus: Vec<f64>,
    pub data_path: PathBuf,
    pub data_sha256: String,
    pub started: String,
    pub finished: String,
    pub config: RunConfig,
    pub fits: Vec<FitRecord>,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        let manifest: RunManifest = serde_json::from_str(&text)?;
        manifest.config.validate()?;
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(io_at(path))?;
        Ok(())
    }
}

/// Accepts either a manifest file or the directory holding one.
pub fn manifest_path(arg: &Path) -> PathBuf {
    if arg.is_dir() {
        arg.join(MANIFEST_FILE)
    } else {
        arg.to_path_buf()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(config: &RunConfig) -> CliResult<String> {
    Ok(sha256_hex(serde_json::to_string(config)?.as_bytes()))
}

pub fn now_rfc3339() -> String {
    humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string()
}
