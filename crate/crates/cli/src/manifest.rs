use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use urllc_precoding::solver::SolverCounters;
use urllc_precoding::ScenarioFile;

/// Git-style object hash (`sha256("blob <len>\0" + content)`) of the
/// canonical JSON form of a scenario.
pub fn config_hash(config: &ScenarioFile) -> String {
    let canonical = serde_json::to_string(config).expect("scenario serializes");
    blob_hash(canonical.as_bytes())
}

fn blob_hash(content: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", content.len()).as_bytes());
    hasher.update(content);
    hex::encode(hasher.finalize())
}

/// Short form used in output file names.
pub fn short_hash(hash: &str) -> &str {
    &hash[..12]
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub manifest_hash: String,
    pub command: String,
    pub arguments: Vec<String>,
    pub seed: u64,
    pub config: ScenarioFile,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub counters: SolverCounters,
}

impl RunManifest {
    pub fn write(&self, out_dir: &Path) -> std::io::Result<PathBuf> {
        let path = out_dir.join(format!("manifest_{}_{}.json", self.command, short_hash(&self.manifest_hash)));
        let mut body = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        body.push('\n');
        std::fs::write(&path, body)?;
        Ok(path)
    }
}
