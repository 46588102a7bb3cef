use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use roadside_core::hash::sha256_hex;
use roadside_core::io::{read_text, write_text};
use serde::Serialize;
use serde_json::Value;

/// Record of one command invocation. Outputs carry `run_id`, which hashes
/// everything here except the wall time.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub version: String,
    pub inputs: BTreeMap<String, String>,
    pub config: Value,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_ms: u128,
}

pub struct Run {
    manifest: RunManifest,
    started: Instant,
}

impl Run {
    pub fn new(command: &str, config: Value) -> Self {
        Run {
            manifest: RunManifest {
                run_id: String::new(),
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                inputs: BTreeMap::new(),
                config,
                outputs: BTreeMap::new(),
                wall_time_ms: 0,
            },
            started: Instant::now(),
        }
    }

    /// Reads an input file and records its hash under `role`.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<String> {
        let text = read_text(path)?;
        self.manifest.inputs.insert(role.to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    /// Fixes the run id. Call after every input is recorded.
    pub fn id(&mut self) -> String {
        if self.manifest.run_id.is_empty() {
            let key = serde_json::json!({
                "command": self.manifest.command,
                "version": self.manifest.version,
                "inputs": self.manifest.inputs,
                "config": self.manifest.config,
            });
            self.manifest.run_id = sha256_hex(key.to_string().as_bytes());
        }
        self.manifest.run_id.clone()
    }

    pub fn output(&mut self, role: &str, path: &Path, text: &str) -> Result<()> {
        write_text(path, text)?;
        self.manifest.outputs.insert(role.to_string(), sha256_hex(text.as_bytes()));
        Ok(())
    }

    /// Writes the manifest next to the outputs.
    pub fn finish(mut self, path: PathBuf) -> Result<()> {
        self.id();
        self.manifest.wall_time_ms = self.started.elapsed().as_millis();
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        write_text(&path, &text)?;
        Ok(())
    }
}

/// `out.ext` → `out.ext.manifest.json`.
pub fn beside(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}
