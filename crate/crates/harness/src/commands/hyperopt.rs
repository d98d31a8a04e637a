use super::{opt_num, train_run, write_text};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runlog::write_json;
use agm_core::hamiltonian::HamiltonianSpec;
use agm_core::rng::substream;
use agm_core::vmc::TrainConfig;
use rand::Rng;
use serde::Serialize;
use std::path::Path;

const SEARCH_STREAM: u64 = 0x4859_5045;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub trial: usize,
    pub alpha0: f64,
    pub gamma: f64,
    /// Mean energy of the last 100 steps; `None` if the trial failed.
    pub final_energy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperoptReport {
    pub trials: Vec<Trial>,
    pub best: usize,
}

impl HyperoptReport {
    pub fn best_trial(&self) -> &Trial {
        &self.trials[self.best]
    }

    /// `base` with the winning learning-rate schedule.
    pub fn apply(&self, base: &TrainConfig) -> TrainConfig {
        let t = self.best_trial();
        TrainConfig { alpha0: t.alpha0, gamma: t.gamma, ..base.clone() }
    }
}

fn trials_csv(trials: &[Trial]) -> String {
    let mut out = String::from("trial,alpha0,gamma,final_energy,status\n");
    for t in trials {
        let status = if t.error.is_some() { "failed" } else { "ok" };
        out.push_str(&format!("{},{},{},{},{status}\n", t.trial, t.alpha0, t.gamma, opt_num(t.final_energy)));
    }
    out
}

/// Random search over `(alpha0, gamma)` for `h`, logging each trial under
/// `dir/trial-XXX`.
pub fn run_hyperopt(h: &HamiltonianSpec, cfg: &ExperimentConfig, dir: &Path) -> Result<HyperoptReport> {
    let hy = &cfg.hyperopt;
    if hy.trials == 0 {
        return Err(HarnessError::config("hyperopt.trials", "need at least one trial"));
    }
    let mut rng = substream(cfg.search_seed, &[SEARCH_STREAM]);
    let (la, lb) = (hy.alpha0_range[0].ln(), hy.alpha0_range[1].ln());
    let [ga, gb] = hy.gamma_range;
    let mut trial_cfg = cfg.clone();
    trial_cfg.oracle.enable_ed = false;
    trial_cfg.output.checkpoint_interval = 0;
    let mut trials = Vec::new();
    for k in 0..hy.trials {
        let alpha0 = if la < lb { rng.gen_range(la..lb).exp() } else { hy.alpha0_range[0] };
        let gamma = if ga < gb { rng.gen_range(ga..=gb) } else { ga };
        let train = TrainConfig {
            alpha0,
            gamma,
            n_steps: hy.steps,
            n_samples: hy.samples,
            time_budget: hy.trial_time_budget,
            ..cfg.train.clone()
        };
        let res = train_run(h, &trial_cfg, &train, "hyperopt-trial", &dir.join(format!("trial-{k:03}")));
        let (final_energy, error) = match res {
            Ok(r) => match r.footer.fault {
                Some(f) => (None, Some(f)),
                None => (r.footer.final_energy, None),
            },
            Err(e @ HarnessError::Io { .. }) => return Err(e),
            Err(e) => (None, Some(e.to_string())),
        };
        log::info!("trial {k}: alpha0 {alpha0:.3e} gamma {gamma:.3} -> {final_energy:?}");
        trials.push(Trial { trial: k, alpha0, gamma, final_energy, error });
    }
    let best = trials
        .iter()
        .filter_map(|t| t.final_energy.map(|e| (t.trial, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .ok_or_else(|| HarnessError::Numeric("every hyperopt trial failed".into()))?;
    let report = HyperoptReport { trials, best };
    write_text(&dir.join("trials.csv"), &trials_csv(&report.trials))?;
    write_json(&dir.join("best.json"), report.best_trial())?;
    Ok(report)
}

/// `hyperopt`: search on the configured Hamiltonian into `output.run_dir`.
pub fn cmd_hyperopt(cfg: &ExperimentConfig) -> Result<HyperoptReport> {
    let h = cfg.hamiltonian.build(0.0)?;
    run_hyperopt(&h, cfg, &cfg.output.run_dir)
}
