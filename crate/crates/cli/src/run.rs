//! Run directories: data files, plots and the manifest that describes them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::params::Params;
use crate::plot::PlotError;

pub const MANIFEST: &str = "manifest.json";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub version: String,
    /// SHA-256 of command, parameters and version; embedded in every plot.
    pub checksum: String,
    pub duration_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST);
        let text =
            fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed {}: {e}", path.display())))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Identity of a run: same command, parameters and version give the same value.
pub fn run_checksum(params: &Params) -> String {
    let canonical = serde_json::json!({
        "command": params.command,
        "params": params.values,
        "version": VERSION,
    });
    sha256_hex(canonical.to_string().as_bytes())
}

/// CSV cell text: 17 significant digits for numbers.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct RunDir {
    root: PathBuf,
    params: Params,
    checksum: String,
    outputs: Vec<OutputFile>,
    started: Instant,
}

impl RunDir {
    pub fn create(root: &Path, params: &Params) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("cannot create run directory {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            params: params.clone(),
            checksum: run_checksum(params),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(OutputFile { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    /// Comma-separated, header row, LF line endings.
    pub fn csv<R, I>(&mut self, rel: &str, header: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = String>,
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.into_iter().collect::<Vec<_>>())?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.write(rel, &bytes)
    }

    /// Numeric-only CSV from columns of equal length.
    pub fn columns(&mut self, rel: &str, header: &[&str], cols: &[&[f64]]) -> Result<(), CliError> {
        let n = cols.first().map_or(0, |c| c.len());
        let rows = (0..n).map(|i| cols.iter().map(|c| num(c[i])).collect::<Vec<_>>());
        self.csv(rel, header, rows)
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }

    /// Writes the plot only if it rendered.
    pub fn svg(&mut self, rel: &str, plot: Result<String, PlotError>) -> Result<(), CliError> {
        let svg = plot.map_err(|e| CliError::Numerical(e.to_string()))?;
        self.write(rel, svg.as_bytes())
    }

    pub fn finish(self) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: self.params.command.clone(),
            params: self.params.values.clone(),
            version: VERSION.to_string(),
            checksum: self.checksum,
            duration_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(self.root.join(MANIFEST), bytes)?;
        Ok(manifest)
    }
}
