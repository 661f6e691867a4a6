use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Everything needed to rerun a command, echoed into its report.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub region: Option<[f64; 2]>,
    pub config_path: Option<String>,
    /// Settings read from the config file.
    pub config_file: BTreeMap<String, String>,
    /// Settings given as flags; these win over the file.
    pub overrides: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            region: None,
            config_path: None,
            config_file: BTreeMap::new(),
            overrides: BTreeMap::new(),
            seed: 0,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: unix_now(),
            finished_unix: 0,
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix = unix_now();
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
