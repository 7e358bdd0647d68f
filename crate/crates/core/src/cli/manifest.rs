use std::collections::BTreeMap;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance record written next to command outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the configuration or input file bytes, keyed by role.
    pub checksums: BTreeMap<String, String>,
    pub master_seed: Option<u64>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            checksums: BTreeMap::new(),
            master_seed: None,
            tool_version: TOOL_VERSION.to_string(),
            started_at: now_rfc3339(),
            finished_at: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn checksum(&mut self, role: &str, bytes: &[u8]) {
        self.checksums.insert(role.to_string(), sha256_hex(bytes));
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Stamps the end time and writes the manifest to `path`.
    pub fn finish(mut self, path: &Path) -> Result<()> {
        self.finished_at = now_rfc3339();
        super::io::write_json_file(path, &self)
    }
}
