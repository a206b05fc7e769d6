use crate::{runtime_err, CliError};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Output directory that remembers every file written through it.
pub struct OutputDir {
    root: PathBuf,
    written: RefCell<BTreeSet<String>>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<OutputDir, CliError> {
        std::fs::create_dir_all(root).map_err(|e| runtime_err(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir { root: root.to_path_buf(), written: RefCell::new(BTreeSet::new()) })
    }

    fn prepare(&self, rel: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| runtime_err(format!("cannot create {}: {e}", parent.display())))?;
        }
        self.written.borrow_mut().insert(rel.to_string());
        Ok(path)
    }

    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.prepare(rel)?;
        std::fs::write(&path, bytes).map_err(|e| runtime_err(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_text(&self, rel: &str, text: &str) -> Result<(), CliError> {
        self.write_bytes(rel, text.as_bytes())
    }

    pub fn csv_writer(&self, rel: &str) -> Result<csv::Writer<File>, CliError> {
        let path = self.prepare(rel)?;
        csv::Writer::from_path(&path).map_err(|e| runtime_err(format!("cannot write {}: {e}", path.display())))
    }

    pub fn finish_csv(&self, mut writer: csv::Writer<File>) -> Result<(), CliError> {
        writer.flush().map_err(runtime_err)
    }
}

#[derive(Serialize)]
struct OutputFile {
    path: String,
    sha256: String,
}

/// Run manifest: everything needed to reproduce the run, plus digests of
/// every output file.
#[derive(Serialize)]
pub struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    master_seed: u64,
    config: Value,
    pub results: Value,
    started_unix: u64,
    finished_unix: u64,
    outputs: Vec<OutputFile>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| runtime_err(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub fn start(command: &'static str, config: Value, master_seed: u64) -> Manifest {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            master_seed,
            config,
            results: Value::Null,
            started_unix: unix_now(),
            finished_unix: 0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(mut self, dir: &OutputDir) -> Result<(), CliError> {
        self.finished_unix = unix_now();
        let written = dir.written.borrow().clone();
        for rel in written {
            let sha256 = sha256_file(&dir.root.join(&rel))?;
            self.outputs.push(OutputFile { path: rel, sha256 });
        }
        let text = serde_json::to_string_pretty(&self).map_err(runtime_err)?;
        std::fs::write(dir.root.join("manifest.json"), text + "\n").map_err(runtime_err)
    }
}
