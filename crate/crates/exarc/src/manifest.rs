//! Run manifest written next to every output.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub versions: BTreeMap<String, String>,
    /// Seconds since the Unix epoch. Reports themselves carry no timestamps.
    pub timestamp: u64,
}

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>, outputs: &[&str]) -> Self {
        let versions = [("exarc", env!("CARGO_PKG_VERSION")), ("exarc-core", exarc_core::VERSION)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self {
            command: command.to_string(),
            args: std::env::args().collect(),
            config,
            seed,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            versions,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }
}
