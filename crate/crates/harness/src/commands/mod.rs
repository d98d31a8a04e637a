mod exact_learn;
mod hyperopt;
mod sweep;

pub use exact_learn::{cmd_exact_learn, ExactLearnReport, SiteReport};
pub use hyperopt::{cmd_hyperopt, run_hyperopt, HyperoptReport, Trial};
pub use sweep::{cmd_disorder_sweep, RealizationResult, SweepReport, SweepRow};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runlog::{write_json, RunFooter, RunHeader, RunWriter, CHECKPOINT_FILE};
use agm_core::ansatz::AgmParams;
use agm_core::checkpoint::{self, Provenance};
use agm_core::exact::{ground_state_dense, variational_energy_exact, MAX_DENSE_SITES};
use agm_core::hamiltonian::HamiltonianSpec;
use agm_core::vmc::{default_group, train_with_observer, Control, TrainConfig};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// A finished (or faulted) training run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub dir: PathBuf,
    pub footer: RunFooter,
    pub params: AgmParams,
}

fn save_checkpoint(dir: &Path, p: &AgmParams, cfg: &TrainConfig, step: usize) -> Result<()> {
    let path = dir.join(CHECKPOINT_FILE);
    let prov = Provenance { init_seed: Some(cfg.seed), train_seed: Some(cfg.seed), step: Some(step as u64) };
    checkpoint::save(&path, p, prov).map_err(HarnessError::io(path))
}

/// Trains `h` with `train`, streaming the run directory `dir`. A numeric
/// fault is recorded in the footer, not returned as an error.
pub fn train_run(h: &HamiltonianSpec, cfg: &ExperimentConfig, train: &TrainConfig, command: &str, dir: &Path) -> Result<RunResult> {
    let mut snapshot = cfg.clone();
    snapshot.train = train.clone();
    let mut writer = RunWriter::create(dir, &RunHeader::new(command, &snapshot))?;
    let interval = cfg.output.checkpoint_interval;
    let mut io_error = None;
    let out = train_with_observer(h, train, |r, p| {
        let res = writer.append(r).and_then(|_| {
            if interval > 0 && (r.step + 1) % interval == 0 {
                save_checkpoint(dir, p, train, r.step + 1)?;
            }
            Ok(())
        });
        if (r.step + 1) % 100 == 0 {
            log::info!("{}: step {} energy {:.6} ± {:.2e}", dir.display(), r.step + 1, r.energy, r.stderr);
        }
        match res {
            Ok(()) => Control::Continue,
            Err(e) => {
                io_error = Some(e);
                Control::Stop
            }
        }
    })
    .map_err(|e| match e {
        agm_core::Error::NotStoquastic(m) | agm_core::Error::InvalidInput(m) => HarnessError::config("train", m),
        e => e.into(),
    })?;
    if let Some(e) = io_error {
        return Err(e);
    }
    save_checkpoint(dir, &out.params, train, out.records.len())?;
    let n = h.n_sites();
    let (mut exact_energy, mut ed_energy) = (None, None);
    if cfg.oracle.enable_ed && n <= cfg.oracle.ed_max_sites.min(MAX_DENSE_SITES) {
        let group = train.symmetrize.then(|| default_group(h));
        exact_energy = Some(variational_energy_exact(h, &out.params, group.as_ref())?);
        ed_energy = Some(ground_state_dense(h, cfg.oracle.ed_tol)?.energy);
    }
    let footer = RunFooter {
        steps: out.records.len(),
        final_energy: out.final_energy,
        total_wall_s: out.wall_time_s,
        capped_ratios: out.capped,
        fault: out.fault.as_ref().map(|e| e.to_string()),
        exact_energy,
        ed_energy,
    };
    writer.finish(&footer)?;
    Ok(RunResult { dir: dir.to_path_buf(), footer, params: out.params })
}

/// `train`: one run into `output.run_dir`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<RunResult> {
    let h = cfg.hamiltonian.build(0.0)?;
    let res = train_run(&h, cfg, &cfg.train, "train", &cfg.output.run_dir)?;
    if let Some(f) = &res.footer.fault {
        return Err(HarnessError::Numeric(format!("{f} (partial log in {})", res.dir.display())));
    }
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdReport {
    pub n_sites: usize,
    pub energy: f64,
    pub energy_per_site: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Energy recomputed at a 1000x looser tolerance, as a self-check.
    pub check_energy: f64,
    pub check_tol: f64,
}

/// `ed`: dense ground state; writes `ed.json` and optionally `weights.csv`.
pub fn cmd_ed(cfg: &ExperimentConfig) -> Result<EdReport> {
    let h = cfg.hamiltonian.build(0.0)?;
    let n = h.n_sites();
    if n > MAX_DENSE_SITES {
        return Err(HarnessError::config("hamiltonian", format!("{n} sites exceed the dense limit of {MAX_DENSE_SITES}")));
    }
    let tol = cfg.oracle.ed_tol;
    let psi = ground_state_dense(&h, tol)?;
    let check_tol = tol * 1e3;
    let check = ground_state_dense(&h, check_tol)?;
    let report = EdReport {
        n_sites: n,
        energy: psi.energy,
        energy_per_site: psi.energy / n as f64,
        residual: psi.residual,
        iterations: psi.iterations,
        check_energy: check.energy,
        check_tol,
    };
    let dir = &cfg.output.run_dir;
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    write_json(&dir.join("ed.json"), &report)?;
    if cfg.oracle.dump_weights {
        let w = agm_core::exact::WeightTable::from_state(&psi);
        let path = dir.join("weights.csv");
        std::fs::write(&path, agm_core::exact::weights_csv(&w)).map_err(HarnessError::io(path))?;
    }
    Ok(report)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(HarnessError::io(path))
}

pub(crate) fn opt_num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
