use super::{opt_num, run_hyperopt, train_run, write_text};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runlog::write_json;
use agm_core::math::mean_std;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationResult {
    pub g: f64,
    pub realization: usize,
    pub disorder_seed: u64,
    pub final_energy: Option<f64>,
    pub exact_energy: Option<f64>,
    pub ed_energy: Option<f64>,
    pub error: Option<String>,
}

/// Statistics over the successful realizations at one field value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub g: f64,
    pub alpha0: f64,
    pub gamma: f64,
    pub succeeded: usize,
    pub failed: usize,
    pub mean_final: Option<f64>,
    pub stderr_final: Option<f64>,
    pub mean_exact: Option<f64>,
    pub mean_ed: Option<f64>,
    /// Largest `(exact - ed) / |ed|` over the realizations.
    pub max_rel_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub realizations: Vec<RealizationResult>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn summarize(g: f64, alpha0: f64, gamma: f64, runs: &[RealizationResult]) -> SweepRow {
    let ok: Vec<&RealizationResult> = runs.iter().filter(|r| r.error.is_none()).collect();
    let finals: Vec<f64> = ok.iter().filter_map(|r| r.final_energy).collect();
    let exact: Vec<f64> = ok.iter().filter_map(|r| r.exact_energy).collect();
    let ed: Vec<f64> = ok.iter().filter_map(|r| r.ed_energy).collect();
    let gaps: Vec<f64> = ok
        .iter()
        .filter_map(|r| Some((r.exact_energy? - r.ed_energy?) / r.ed_energy?.abs()))
        .collect();
    let (m, s) = if finals.is_empty() { (None, None) } else {
        let (m, sd) = mean_std(&finals);
        (Some(m), Some(sd / (finals.len() as f64).sqrt()))
    };
    SweepRow {
        g,
        alpha0,
        gamma,
        succeeded: ok.len(),
        failed: runs.len() - ok.len(),
        mean_final: m,
        stderr_final: s,
        mean_exact: mean(&exact),
        mean_ed: mean(&ed),
        max_rel_gap: gaps.into_iter().reduce(f64::max),
    }
}

fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("g,alpha0,gamma,succeeded,failed,mean_final,stderr_final,mean_exact,mean_ed,max_rel_gap\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.g,
            r.alpha0,
            r.gamma,
            r.succeeded,
            r.failed,
            opt_num(r.mean_final),
            opt_num(r.stderr_final),
            opt_num(r.mean_exact),
            opt_num(r.mean_ed),
            opt_num(r.max_rel_gap)
        ));
    }
    out
}

fn realizations_csv(runs: &[RealizationResult]) -> String {
    let mut out = String::from("g,realization,disorder_seed,status,final_energy,exact_energy,ed_energy\n");
    for r in runs {
        let status = if r.error.is_some() { "failed" } else { "ok" };
        out.push_str(&format!(
            "{},{},{},{status},{},{},{}\n",
            r.g,
            r.realization,
            r.disorder_seed,
            opt_num(r.final_energy),
            opt_num(r.exact_energy),
            opt_num(r.ed_energy)
        ));
    }
    out
}

/// `disorder-sweep`: for each field value, optionally tune on the first
/// realization, then train every realization `k` with disorder seed
/// `base_seed + k`. Failures are isolated per realization.
pub fn cmd_disorder_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let sw = &cfg.sweep;
    if sw.realizations == 0 {
        return Err(HarnessError::config("sweep.realizations", "need at least one realization"));
    }
    let g_values = if sw.g_values.is_empty() { vec![cfg.hamiltonian.g] } else { sw.g_values.clone() };
    let root = &cfg.output.run_dir;
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for (gi, &g) in g_values.iter().enumerate() {
        let gdir = root.join(format!("g-{gi:02}"));
        let train = if sw.tune {
            let h = cfg.hamiltonian.build_with(g, sw.base_seed, 0.0)?;
            run_hyperopt(&h, cfg, &gdir.join("hyperopt"))?.apply(&cfg.train)
        } else {
            cfg.train.clone()
        };
        let mut runs = Vec::new();
        for k in 0..sw.realizations {
            let seed = sw.base_seed + k as u64;
            let mut rcfg = cfg.clone();
            rcfg.hamiltonian.g = g;
            rcfg.hamiltonian.disorder_seed = seed;
            let res = rcfg
                .hamiltonian
                .build(0.0)
                .and_then(|h| train_run(&h, &rcfg, &train, "disorder-sweep", &gdir.join(format!("r-{k:03}"))));
            let mut r = RealizationResult {
                g,
                realization: k,
                disorder_seed: seed,
                final_energy: None,
                exact_energy: None,
                ed_energy: None,
                error: None,
            };
            match res {
                Ok(run) => {
                    r.final_energy = run.footer.final_energy;
                    r.exact_energy = run.footer.exact_energy;
                    r.ed_energy = run.footer.ed_energy;
                    r.error = run.footer.fault;
                }
                Err(e) => r.error = Some(e.to_string()),
            }
            if let Some(e) = &r.error {
                log::warn!("g = {g}, realization {k} failed: {e}");
            }
            runs.push(r);
        }
        rows.push(summarize(g, train.alpha0, train.gamma, &runs));
        all.extend(runs);
    }
    std::fs::create_dir_all(root).map_err(HarnessError::io(root))?;
    write_text(&root.join("summary.csv"), &summary_csv(&rows))?;
    write_text(&root.join("realizations.csv"), &realizations_csv(&all))?;
    let report = SweepReport { rows, realizations: all };
    write_json(&root.join("summary.json"), &report)?;
    Ok(report)
}
