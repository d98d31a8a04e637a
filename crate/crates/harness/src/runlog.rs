//! Run directories.
//!
//! A run directory holds `header.json` (config snapshot, seeds, version,
//! start time), `log.jsonl` (one [`StepRecord`] per line, written as training
//! goes), `footer.json` (final energy, wall time, exact comparisons) and
//! `checkpoint.json` (latest parameters).

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use agm_core::vmc::StepRecord;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const LOG_FILE: &str = "log.jsonl";
pub const HEADER_FILE: &str = "header.json";
pub const FOOTER_FILE: &str = "footer.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// CSV columns of an exported log, in order.
pub const CSV_COLUMNS: [&str; 7] = ["step", "t_wall_s", "energy", "stderr", "lr", "grad_norm", "n_samples"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub train: u64,
    pub disorder: u64,
    pub search: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub command: String,
    pub code_version: String,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub seeds: Seeds,
    pub config: ExperimentConfig,
}

impl RunHeader {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        RunHeader {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            seeds: Seeds {
                train: config.train.seed,
                disorder: config.hamiltonian.disorder_seed,
                search: config.search_seed,
            },
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFooter {
    pub steps: usize,
    /// Mean energy of the last 100 steps.
    pub final_energy: Option<f64>,
    pub total_wall_s: f64,
    pub capped_ratios: u64,
    pub fault: Option<String>,
    /// Exact variational energy of the final parameters (small systems).
    pub exact_energy: Option<f64>,
    /// Dense ground-state energy (small systems).
    pub ed_energy: Option<f64>,
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(HarnessError::io(path))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Log { path: path.into(), line: e.line(), message: e.to_string() })
}

/// Streams records into a run directory.
pub struct RunWriter {
    dir: PathBuf,
    log: BufWriter<File>,
}

impl RunWriter {
    pub fn create(dir: &Path, header: &RunHeader) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        write_json(&dir.join(HEADER_FILE), header)?;
        let path = dir.join(LOG_FILE);
        let file = File::create(&path).map_err(HarnessError::io(&path))?;
        Ok(RunWriter { dir: dir.to_path_buf(), log: BufWriter::new(file) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn append(&mut self, r: &StepRecord) -> Result<()> {
        let path = self.dir.join(LOG_FILE);
        serde_json::to_writer(&mut self.log, r).expect("serializable");
        self.log.write_all(b"\n").and_then(|_| self.log.flush()).map_err(HarnessError::io(path))
    }

    pub fn finish(mut self, footer: &RunFooter) -> Result<()> {
        let path = self.dir.join(LOG_FILE);
        self.log.flush().map_err(HarnessError::io(path))?;
        write_json(&self.dir.join(FOOTER_FILE), footer)
    }
}

pub fn read_header(dir: &Path) -> Result<RunHeader> {
    read_json(&dir.join(HEADER_FILE))
}

pub fn read_footer(dir: &Path) -> Result<RunFooter> {
    read_json(&dir.join(FOOTER_FILE))
}

/// Parses a JSONL log (or the log inside a run directory), naming the first
/// malformed line.
pub fn read_records(path: &Path) -> Result<Vec<StepRecord>> {
    let path = if path.is_dir() { path.join(LOG_FILE) } else { path.to_path_buf() };
    let file = File::open(&path).map_err(HarnessError::io(&path))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(HarnessError::io(&path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line)
            .map_err(|e| HarnessError::Log { path: path.clone(), line: k + 1, message: e.to_string() })?;
        out.push(r);
    }
    Ok(out)
}

/// CSV with the columns of [`CSV_COLUMNS`]; numbers use the shortest
/// representation that parses back to the same value.
pub fn records_csv(records: &[StepRecord]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.step, r.t_wall_s, r.energy, r.stderr, r.lr, r.grad_norm, r.n_samples
        ));
    }
    out
}

pub fn export_csv(log: &Path) -> Result<String> {
    Ok(records_csv(&read_records(log)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(step: usize, e: f64) -> StepRecord {
        StepRecord { step, t_wall_s: 0.1 * step as f64, energy: e, stderr: 1e-3 / 3.0, lr: 0.01, grad_norm: 2.5, n_samples: 64 }
    }

    #[test]
    fn empty_log_gives_header_only() {
        assert_eq!(records_csv(&[]), "step,t_wall_s,energy,stderr,lr,grad_norm,n_samples\n");
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![rec(0, -1.0 / 3.0), rec(1, -(5f64.sqrt())), rec(2, -1e-17)];
        let path = dir.path().join(LOG_FILE);
        let text: String = recs.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
        std::fs::write(&path, text).unwrap();
        let csv = export_csv(dir.path()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        for (line, r) in lines[1..].iter().zip(&recs) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(v, vec![r.step as f64, r.t_wall_s, r.energy, r.stderr, r.lr, r.grad_norm, r.n_samples as f64]);
        }
    }

    #[test]
    fn malformed_line_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = serde_json::to_string(&rec(0, 1.0)).unwrap();
        std::fs::write(&path, format!("{good}\n{good}\n{{\"step\": 2}}\n")).unwrap();
        match read_records(&path) {
            Err(HarnessError::Log { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
