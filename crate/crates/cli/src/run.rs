//! Run metadata and atomic output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to replay a command.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub version: &'static str,
    pub inputs: Vec<InputRecord>,
    pub parameters: BTreeMap<String, Value>,
    pub output: String,
    pub format: String,
}

impl RunConfig {
    pub fn new(command: &str, output: &Path, format: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            output: output.display().to_string(),
            format: format.to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).expect("parameter serializes"));
        self
    }

    /// Reads an input file, recording its path and content hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputRecord { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Serializes `payload` as a JSON object with the run config under `"run"`.
pub fn write_json(path: &Path, payload: impl Serialize, run: &RunConfig) -> Result<()> {
    let mut value = serde_json::to_value(payload)?;
    let obj = value.as_object_mut().context("payload is not a JSON object")?;
    obj.insert("run".to_string(), serde_json::to_value(run)?);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// DOT output with the run config in a leading comment.
pub fn write_dot(path: &Path, dot: &str, run: &RunConfig) -> Result<()> {
    let text = format!("// run: {}\n{dot}", serde_json::to_string(run)?);
    write_atomic(path, text.as_bytes())
}
