//! On-disk datasets: one directory per run holding JSONL rows, replayable
//! circuit records, the aggregated series and a manifest.
//!
//! Writes go through a single consumer in realization order. Any I/O failure
//! leaves a `PARTIAL` marker next to the files so half-written data is never
//! mistaken for a finished run.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitRecord;
use crate::ensemble::{EnsembleSpec, RealizationOutput, Row};
use crate::error::{Error, Result};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const ROWS_FILE: &str = "rows.jsonl";
pub const AGGREGATED_FILE: &str = "aggregated.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PARTIAL_MARKER: &str = "PARTIAL";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    Partial,
}

/// One command applied to a dataset directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestStep {
    pub command: String,
    pub wall_clock_seconds: f64,
    pub status: RunStatus,
}

/// Description of a dataset directory; exactly one per directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    /// Command line of the latest step.
    pub command: String,
    pub config: EnsembleSpec,
    /// Files of the directory, relative to it, sorted.
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub status: RunStatus,
    /// Every step so far, oldest first.
    #[serde(default)]
    pub history: Vec<ManifestStep>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: EnsembleSpec) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
            status: RunStatus::Running,
            history: Vec::new(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path,
            reason: e.to_string(),
        })
    }

    /// Starts a new step on an existing manifest.
    pub fn begin(&mut self, command: impl Into<String>) {
        self.command = command.into();
        self.status = RunStatus::Running;
        self.wall_clock_seconds = 0.0;
    }

    /// Records the outcome of the current step, lists the directory and
    /// writes the manifest.
    pub fn finish(&mut self, dir: &Path, started: Instant, status: RunStatus) -> Result<()> {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        self.status = status;
        self.history.push(ManifestStep {
            command: self.command.clone(),
            wall_clock_seconds: self.wall_clock_seconds,
            status,
        });
        self.outputs = list_outputs(dir)?;
        if !self.outputs.iter().any(|f| f == MANIFEST_FILE) {
            self.outputs.push(MANIFEST_FILE.to_string());
            self.outputs.sort();
        }
        self.save(dir)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifests serialize");
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }
}

/// Relative paths of all files below `dir`, sorted.
pub fn list_outputs(dir: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let entry = entry.map_err(|e| Error::io(&d, e))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if let Ok(rel) = path.strip_prefix(dir) {
                out.push(rel.to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Leaves a marker explaining why the directory is incomplete.
pub fn mark_partial(dir: &Path, reason: &str) {
    // Best effort: the original error is what gets reported.
    let _ = fs::write(dir.join(PARTIAL_MARKER), format!("{reason}\n"));
}

pub fn is_partial(dir: &Path) -> bool {
    dir.join(PARTIAL_MARKER).exists()
}

/// Streaming writer of a simulation run.
pub struct DatasetWriter {
    dir: PathBuf,
    rows: BufWriter<File>,
    records: Option<BufWriter<File>>,
    n_rows: usize,
    n_realizations: usize,
}

impl DatasetWriter {
    /// Creates the directory and empty data files. Records are kept when
    /// `store_records` is set; later measurements and graph analyses need
    /// them.
    pub fn create(dir: &Path, store_records: bool) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let marker = dir.join(PARTIAL_MARKER);
        if marker.exists() {
            fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
        }
        let open = |name: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            File::create(&path)
                .map(BufWriter::new)
                .map_err(|e| Error::io(&path, e))
        };
        let rows = open(ROWS_FILE)?;
        let records = if store_records {
            Some(open(RECORDS_FILE)?)
        } else {
            None
        };
        Ok(DatasetWriter {
            dir: dir.to_path_buf(),
            rows,
            records,
            n_rows: 0,
            n_realizations: 0,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, out: &RealizationOutput) -> Result<()> {
        let res = self.write_inner(out);
        if let Err(e) = &res {
            mark_partial(&self.dir, &e.to_string());
        }
        res
    }

    fn write_inner(&mut self, out: &RealizationOutput) -> Result<()> {
        if let Some(rec) = self.records.as_mut() {
            write_line(rec, &out.record, &self.dir.join(RECORDS_FILE))?;
        }
        for row in &out.rows {
            write_line(&mut self.rows, row, &self.dir.join(ROWS_FILE))?;
        }
        self.n_rows += out.rows.len();
        self.n_realizations += 1;
        Ok(())
    }

    /// Flushes both files; returns (realizations, rows) written.
    pub fn finish(mut self) -> Result<(usize, usize)> {
        let res = self.flush();
        if let Err(e) = &res {
            mark_partial(&self.dir, &e.to_string());
        }
        res.map(|_| (self.n_realizations, self.n_rows))
    }

    fn flush(&mut self) -> Result<()> {
        self.rows
            .flush()
            .map_err(|e| Error::io(self.dir.join(ROWS_FILE), e))?;
        if let Some(rec) = self.records.as_mut() {
            rec.flush()
                .map_err(|e| Error::io(self.dir.join(RECORDS_FILE), e))?;
        }
        Ok(())
    }
}

fn write_line<T: Serialize, W: Write>(w: &mut W, item: &T, path: &Path) -> Result<()> {
    serde_json::to_writer(&mut *w, item).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        write_line(&mut buf, item, path)?;
    }
    write_atomic(path, &buf)
}

/// Reads a JSONL file; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: format!("line {}: {e}", k + 1),
        })?);
    }
    Ok(out)
}

pub fn read_rows(dir: &Path) -> Result<Vec<Row>> {
    read_jsonl(&dir.join(ROWS_FILE))
}

pub fn read_records(dir: &Path) -> Result<Vec<CircuitRecord>> {
    let path = dir.join(RECORDS_FILE);
    if !path.exists() {
        return Err(Error::Config(format!(
            "{} has no circuit records; rerun simulate with records enabled",
            dir.display()
        )));
    }
    read_jsonl(&path)
}

/// Rewrites the row file keeping the rows accepted by `keep` and appending
/// `new_rows`, sorted by realization so the file stays in realization order.
pub fn merge_rows<F: Fn(&Row) -> bool>(dir: &Path, keep: F, new_rows: Vec<Row>) -> Result<usize> {
    let path = dir.join(ROWS_FILE);
    let mut rows: Vec<Row> = if path.exists() {
        read_jsonl::<Row>(&path)?
            .into_iter()
            .filter(|r| keep(r))
            .collect()
    } else {
        Vec::new()
    };
    rows.extend(new_rows);
    // Stable: within a realization the existing order is kept.
    rows.sort_by_key(|r| r.realization);
    write_jsonl(&path, &rows)?;
    Ok(rows.len())
}
