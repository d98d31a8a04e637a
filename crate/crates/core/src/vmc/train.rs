use super::adam::{AdamConstants, OptimizerState};
use super::estimate::{estimate_energy, smoothed_final_energy};
use super::local::{default_group, Evaluation, LocalEnergy};
use crate::ansatz::{init_params, AgmParams, SymmetryGroup};
use crate::error::{Error, Result};
use crate::hamiltonian::{check_stoquastic, HamiltonianSpec};
use crate::rng::{self, tag};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Steps between learning-rate decays.
pub const DECAY_INTERVAL: usize = 1000;

/// Samples per deterministic reduction chunk.
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub n_samples: usize,
    pub n_steps: usize,
    pub alpha0: f64,
    /// Learning-rate factor applied every `DECAY_INTERVAL` steps.
    pub gamma: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Train the group-averaged model (see [`default_group`]).
    pub symmetrize: bool,
    /// Wall-clock limit in seconds.
    pub time_budget: Option<f64>,
    /// Standard deviation of the initial parameters.
    pub init_sigma: f64,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub threads: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConstants::default();
        TrainConfig {
            n_samples: 1 << 12,
            n_steps: 10_000,
            alpha0: 1e-2,
            gamma: 0.9,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
            seed: 0,
            symmetrize: false,
            time_budget: None,
            init_sigma: 0.0,
            threads: None,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConstants {
        AdamConstants { beta1: self.adam_beta1, beta2: self.adam_beta2, eps: self.adam_eps }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be at least 1".into()));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha0 = {} must be positive", self.alpha0)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidInput(format!("gamma = {} outside (0, 1]", self.gamma)));
        }
        if let Some(t) = self.time_budget {
            if t.is_nan() || t < 0.0 {
                return Err(Error::InvalidInput(format!("time_budget = {t} must be >= 0")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("threads must be at least 1".into()));
        }
        self.adam().validate()
    }
}

/// `alpha0 * gamma^floor(step / 1000)`.
pub fn lr_at(cfg: &TrainConfig, step: usize) -> f64 {
    cfg.alpha0 * cfg.gamma.powi((step / DECAY_INTERVAL) as i32)
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub step: usize,
    pub t_wall_s: f64,
    pub energy: f64,
    pub stderr: f64,
    pub lr: f64,
    pub grad_norm: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters after the last successful step.
    pub params: AgmParams,
    pub records: Vec<StepRecord>,
    /// Mean energy of the last 100 steps.
    pub final_energy: Option<f64>,
    pub wall_time_s: f64,
    /// Total number of ratios clamped by the overflow cap.
    pub capped: u64,
    /// The numeric fault that ended training early, if any.
    pub fault: Option<Error>,
}

/// Stepwise trainer; [`train`] drives it to completion.
pub struct Trainer<'a> {
    h: &'a HamiltonianSpec,
    cfg: TrainConfig,
    group: Option<SymmetryGroup>,
    params: AgmParams,
    opt: OptimizerState,
    step: usize,
    capped: u64,
    start: Instant,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Trainer<'a> {
    pub fn new(h: &'a HamiltonianSpec, cfg: TrainConfig) -> Result<Self> {
        let p = init_params(h.n_sites(), cfg.init_sigma, cfg.seed)?;
        Self::with_params(h, cfg, p)
    }

    pub fn with_params(h: &'a HamiltonianSpec, cfg: TrainConfig, params: AgmParams) -> Result<Self> {
        check_stoquastic(h)?;
        cfg.validate()?;
        if params.n() != h.n_sites() {
            return Err(Error::Shape { expected: h.n_sites(), got: params.n() });
        }
        let group = cfg.symmetrize.then(|| default_group(h));
        Self::build(h, cfg, params, group)
    }

    /// Symmetrized training with an explicit group.
    pub fn with_group(h: &'a HamiltonianSpec, cfg: TrainConfig, params: AgmParams, group: SymmetryGroup) -> Result<Self> {
        check_stoquastic(h)?;
        cfg.validate()?;
        if params.n() != h.n_sites() || group.n() != h.n_sites() {
            return Err(Error::Shape { expected: h.n_sites(), got: params.n().min(group.n()) });
        }
        Self::build(h, cfg, params, Some(group))
    }

    fn build(h: &'a HamiltonianSpec, cfg: TrainConfig, params: AgmParams, group: Option<SymmetryGroup>) -> Result<Self> {
        let pool = match cfg.threads {
            Some(t) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?,
            ),
            None => None,
        };
        let opt = OptimizerState::new(params.as_slice().len(), cfg.adam())?;
        Ok(Trainer { h, cfg, group, params, opt, step: 0, capped: 0, start: Instant::now(), pool })
    }

    pub fn params(&self) -> &AgmParams {
        &self.params
    }

    pub fn group(&self) -> Option<&SymmetryGroup> {
        self.group.as_ref()
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn capped(&self) -> u64 {
        self.capped
    }

    /// Samples, estimates and applies one ADAM update. On error the
    /// parameters are unchanged.
    pub fn step(&mut self) -> Result<StepRecord> {
        let (mean, stderr, grad, capped) = match &self.pool {
            Some(pool) => pool.install(|| self.estimate()),
            None => self.estimate(),
        }?;
        let lr = lr_at(&self.cfg, self.step);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut next = self.opt.clone();
        let delta = next.update(&grad, lr)?;
        let mut params = self.params.clone();
        for (t, d) in params.as_mut_slice().iter_mut().zip(&delta) {
            *t += d;
        }
        if !params.is_finite() {
            return Err(Error::Numeric(format!("parameters became non-finite at step {}", self.step)));
        }
        if capped > 0 {
            log::warn!("step {}: {capped} probability ratios hit the overflow cap", self.step);
        }
        let record = StepRecord {
            step: self.step,
            t_wall_s: self.elapsed(),
            energy: mean,
            stderr,
            lr,
            grad_norm,
            n_samples: self.cfg.n_samples,
        };
        self.params = params;
        self.opt = next;
        self.capped += capped;
        self.step += 1;
        Ok(record)
    }

    fn estimate(&self) -> Result<(f64, f64, Vec<f64>, u64)> {
        let n = self.cfg.n_samples;
        let p = &self.params;
        let group = self.group.as_ref();
        let eval = LocalEnergy::new(self.h, p, group)?;
        let (seed, step) = (self.cfg.seed, self.step as u64);
        let chunks: Vec<Result<Vec<Evaluation>>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                (c * CHUNK..((c + 1) * CHUNK).min(n))
                    .map(|k| {
                        let cache = p.sample_keyed(seed, step, k as u64);
                        match group {
                            Some(g) if !g.is_trivial() => {
                                let mut r = rng::substream(seed, &[tag::SYMMETRY, step, k as u64]);
                                let e = &g.elements()[r.gen_range(0..g.len())];
                                eval.evaluate(&e.apply(&p.scatter(&cache.x)))
                            }
                            _ => eval.evaluate_sampled(cache),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut evals = Vec::with_capacity(n);
        for c in chunks {
            evals.extend(c?);
        }
        let energies: Vec<f64> = evals.iter().map(|e| e.energy).collect();
        let (mean, stderr) = estimate_energy(&energies)?;
        let capped = evals.iter().map(|e| e.capped as u64).sum();
        let dim = p.as_slice().len();
        let inv_n = 1.0 / n as f64;
        let partial: Vec<Vec<f64>> = evals
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut g = vec![0.0; dim];
                for e in chunk {
                    e.accumulate_score(p, (e.energy - mean) * inv_n, &mut g);
                }
                g
            })
            .collect();
        let mut grad = vec![0.0; dim];
        for g in partial {
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        Ok((mean, stderr, grad, capped))
    }
}

/// Trains from the configured initialization for `n_steps` or until the
/// time budget runs out.
pub fn train(h: &HamiltonianSpec, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_observer(h, cfg, |_, _| Control::Continue)
}

/// Like [`train`], calling `observer` after every step.
pub fn train_with_observer(
    h: &HamiltonianSpec,
    cfg: &TrainConfig,
    observer: impl FnMut(&StepRecord, &AgmParams) -> Control,
) -> Result<TrainOutcome> {
    run(Trainer::new(h, cfg.clone())?, observer)
}

/// Like [`train_with_observer`], starting from the given parameters.
pub fn train_from(
    h: &HamiltonianSpec,
    cfg: &TrainConfig,
    init: AgmParams,
    observer: impl FnMut(&StepRecord, &AgmParams) -> Control,
) -> Result<TrainOutcome> {
    run(Trainer::with_params(h, cfg.clone(), init)?, observer)
}

fn run(mut t: Trainer<'_>, mut observer: impl FnMut(&StepRecord, &AgmParams) -> Control) -> Result<TrainOutcome> {
    let mut records = Vec::new();
    let mut fault = None;
    while t.steps_done() < t.cfg.n_steps {
        if t.cfg.time_budget.is_some_and(|b| t.elapsed() >= b) {
            break;
        }
        match t.step() {
            Ok(r) => {
                let stop = observer(&r, t.params()) == Control::Stop;
                records.push(r);
                if stop {
                    break;
                }
            }
            Err(e @ Error::Numeric(_)) => {
                log::error!("training stopped at step {}: {e}", t.steps_done());
                fault = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let energies: Vec<f64> = records.iter().map(|r| r.energy).collect();
    Ok(TrainOutcome {
        final_energy: smoothed_final_energy(&energies),
        wall_time_s: t.elapsed(),
        capped: t.capped(),
        params: t.params,
        records,
        fault,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ground_state_dense, variational_energy_exact};
    use crate::lattice::build_chain;

    #[test]
    fn schedule() {
        let cfg = TrainConfig { alpha0: 0.01, gamma: 0.9, ..Default::default() };
        assert_eq!(lr_at(&cfg, 0), 0.01);
        assert!((lr_at(&cfg, 2500) - 0.0081).abs() < 1e-15);
        let flat = TrainConfig { gamma: 1.0, ..cfg };
        assert_eq!(lr_at(&flat, 123_456), 0.01);
    }

    #[test]
    fn single_spin_stays_at_optimum() {
        let h = HamiltonianSpec::tim(build_chain(1).unwrap(), 1.0).unwrap();
        let cfg = TrainConfig { n_steps: 20, n_samples: 64, ..Default::default() };
        let out = train(&h, &cfg).unwrap();
        assert_eq!(out.records.len(), 20);
        assert!((out.final_energy.unwrap() + 1.0).abs() < 1e-6);
        assert!(out.records.iter().all(|r| r.stderr == 0.0));
    }

    #[test]
    fn two_spin_converges() {
        let h = HamiltonianSpec::tim(build_chain(2).unwrap(), 1.0).unwrap();
        let cfg = TrainConfig { n_steps: 2000, n_samples: 1 << 10, alpha0: 0.02, seed: 3, ..Default::default() };
        let out = train(&h, &cfg).unwrap();
        let e = variational_energy_exact(&h, &out.params, None).unwrap();
        let e0 = ground_state_dense(&h, 1e-12).unwrap().energy;
        assert!(e >= e0 - 1e-10);
        assert!(e - e0 < 1e-3, "{e} vs {e0}");
    }

    #[test]
    fn refuses_bad_inputs() {
        let h = HamiltonianSpec::tim(build_chain(3).unwrap(), -1.0).unwrap();
        assert!(matches!(train(&h, &TrainConfig::default()), Err(Error::NotStoquastic(_))));
        let h = HamiltonianSpec::tim(build_chain(3).unwrap(), 1.0).unwrap();
        for bad in [
            TrainConfig { n_samples: 0, ..Default::default() },
            TrainConfig { gamma: 1.5, ..Default::default() },
            TrainConfig { alpha0: 0.0, ..Default::default() },
            TrainConfig { adam_beta2: 1.0, ..Default::default() },
        ] {
            assert!(train(&h, &bad).is_err());
        }
    }

    #[test]
    fn budget_and_observer_stop() {
        let h = HamiltonianSpec::tim(build_chain(4).unwrap(), 1.0).unwrap();
        let cfg = TrainConfig { n_steps: 1000, n_samples: 32, time_budget: Some(0.0), ..Default::default() };
        assert!(train(&h, &cfg).unwrap().records.is_empty());
        let cfg = TrainConfig { n_steps: 1000, n_samples: 32, ..Default::default() };
        let out = train_with_observer(&h, &cfg, |r, _| if r.step == 4 { Control::Stop } else { Control::Continue }).unwrap();
        assert_eq!(out.records.len(), 5);
    }
}
