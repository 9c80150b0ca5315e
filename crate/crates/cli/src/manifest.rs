//! Run manifests: every output file embeds the command, its parameters,
//! the tool version and a hash of the input, so identical manifests
//! reproduce identical outputs byte for byte. Timestamps are deliberately
//! absent.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub input_hash: String,
}

impl RunManifest {
    pub fn new(command: &str, input_bytes: &[u8]) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_hash: hex_digest(input_bytes),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Leading comment lines for CSV outputs.
    pub fn csv_header(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command: {}\n", self.command));
        for (k, v) in &self.parameters {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&format!("# tool_version: {}\n", self.tool_version));
        out.push_str(&format!("# input_hash: {}\n", self.input_hash));
        out
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
