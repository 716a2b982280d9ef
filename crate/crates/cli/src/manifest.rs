use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

/// Everything needed to rerun a command and compare its outcome.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub outcome: Value,
    pub nodes: u64,
    pub wall_time_secs: f64,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            outcome: Value::Null,
            nodes: 0,
            wall_time_secs: 0.0,
            artifacts: Vec::new(),
        }
    }

    pub fn finish(&mut self, started: Instant) {
        self.wall_time_secs = started.elapsed().as_secs_f64();
    }

    /// Writes `name` under `dir` and records it as an artifact.
    pub fn write_artifact(&mut self, dir: &Path, name: &str, contents: &str) -> abgame::Result<()> {
        let path = dir.join(name);
        write(&path, contents)?;
        self.artifacts.push(path.display().to_string());
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> abgame::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write(&path, &text)?;
        Ok(path)
    }
}

fn write(path: &Path, contents: &str) -> abgame::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> abgame::Error {
    abgame::Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))
}
