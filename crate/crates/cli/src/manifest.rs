use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub git_describe: String,
    pub threads: Option<usize>,
    pub started: String,
    pub finished: String,
    pub wall_clock_secs: f64,
    /// Per-stage timings, when the command reports them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Value>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<(String, u64)> {
    let bytes = std::fs::read(path)?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

/// Resolves the output directory: `--out`, else `$PSLAB_OUT/<command>`,
/// else `pslab-out/<command>`.
pub fn output_dir(out: Option<&Path>, command: &str) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os("PSLAB_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("pslab-out")).join(command),
    }
}

/// Single writer for one run's output files.
pub struct Run {
    command: String,
    dir: PathBuf,
    threads: Option<usize>,
    started: String,
    clock: Instant,
    files: Vec<String>,
}

impl Run {
    pub fn start(command: &str, dir: PathBuf, threads: Option<usize>) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
        Ok(Self {
            command: command.to_string(),
            dir,
            threads,
            started: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            clock: Instant::now(),
            files: Vec::new(),
        })
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> pslab_core::Result<()>,
    {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|source| CliError::Write { path: path.clone(), source })?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|source| CliError::Write { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, config: Value, seed: Option<u64>) -> CliResult<RunManifest> {
        self.finish_with(config, seed, None)
    }

    pub fn finish_with(mut self, config: Value, seed: Option<u64>, timings: Option<Value>) -> CliResult<RunManifest> {
        self.files.sort();
        self.files.dedup();
        let files = self
            .files
            .iter()
            .map(|name| {
                let path = self.dir.join(name);
                let (sha256, bytes) = sha256_file(&path).map_err(|source| CliError::Write { path, source })?;
                Ok(FileEntry { name: name.clone(), sha256, bytes })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command.clone(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_describe: env!("PSLAB_GIT_DESCRIBE").to_string(),
            threads: self.threads,
            started: self.started.clone(),
            finished: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            wall_clock_secs: self.clock.elapsed().as_secs_f64(),
            timings,
            files,
        };
        let path = self.dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest).map_err(pslab_core::Error::from)?;
        std::fs::write(&path, text + "\n").map_err(|source| CliError::Write { path, source })?;
        Ok(manifest)
    }
}
