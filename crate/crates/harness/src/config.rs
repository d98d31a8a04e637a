//! Experiment configuration.
//!
//! A config is a JSON object with the blocks `hamiltonian` (required),
//! `train`, `oracle`, `output`, `hyperopt`, `sweep` and the integer
//! `search_seed`. Unknown keys are rejected anywhere, and every error names
//! the offending field path.
//!
//! ```json
//! {
//!   "hamiltonian": { "variant": "TIM", "lattice": "chain", "ly": 7, "g": 1.0 },
//!   "train": { "n_steps": 10000, "alpha0": 0.01, "gamma": 0.9, "seed": 1 },
//!   "output": { "run_dir": "runs/tim7" }
//! }
//! ```
//!
//! A chain of `n` sites is `lx = 1, ly = n`.

use crate::error::{HarnessError, Result};
use agm_core::hamiltonian::{check_stoquastic, sample_disorder, HamiltonianSpec, Variant};
use agm_core::lattice::{build_chain, build_square, Geometry, LatticeGraph};
use agm_core::vmc::TrainConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub hyperopt: HyperoptConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub search_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub variant: Variant,
    #[serde(default = "default_lattice")]
    pub lattice: Geometry,
    #[serde(default = "one")]
    pub lx: usize,
    pub ly: usize,
    pub g: f64,
    /// ANNNI competition parameter.
    #[serde(default)]
    pub alpha: f64,
    /// Seed of the DTIM couplings.
    #[serde(default)]
    pub disorder_seed: u64,
    /// Longitudinal field; `exact-learn` defaults it to `1e-3` for XXZ.
    #[serde(default)]
    pub z_field: Option<f64>,
}

fn default_lattice() -> Geometry {
    Geometry::Chain
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Residual tolerance of the dense ground-state solver.
    pub ed_tol: f64,
    /// Compare against dense ED after training when the system is small enough.
    pub enable_ed: bool,
    /// Largest system for exact comparisons after training.
    pub ed_max_sites: usize,
    /// Floor applied to ground-state weights before screening.
    pub weight_floor: f64,
    /// Largest subset size in screening (`None` = full order).
    pub max_order: Option<usize>,
    /// Also write the weight table as CSV.
    pub dump_weights: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            ed_tol: 1e-12,
            enable_ed: true,
            ed_max_sites: 16,
            weight_floor: 1e-12,
            max_order: None,
            dump_weights: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub run_dir: PathBuf,
    /// Steps between checkpoint writes; 0 keeps only the final one.
    pub checkpoint_interval: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { run_dir: PathBuf::from("runs/default"), checkpoint_interval: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperoptConfig {
    pub trials: usize,
    pub steps: usize,
    pub samples: usize,
    /// Log-uniform range of the initial learning rate.
    pub alpha0_range: [f64; 2],
    /// Uniform range of the decay factor.
    pub gamma_range: [f64; 2],
    /// Wall-clock limit per trial, seconds.
    pub trial_time_budget: Option<f64>,
}

impl Default for HyperoptConfig {
    fn default() -> Self {
        HyperoptConfig {
            trials: 30,
            steps: 10_000,
            samples: 1 << 8,
            alpha0_range: [1e-4, 1e-2],
            gamma_range: [0.8, 1.0],
            trial_time_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub realizations: usize,
    /// Realization `k` uses disorder seed `base_seed + k`.
    pub base_seed: u64,
    /// Field values; empty means just `hamiltonian.g`.
    pub g_values: Vec<f64>,
    /// Tune `(alpha0, gamma)` by hyperopt on the first realization of each `g`.
    pub tune: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { realizations: 5, base_seed: 0, g_values: Vec::new(), tune: false }
    }
}

impl HamiltonianConfig {
    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    fn graph(&self) -> Result<LatticeGraph> {
        let nnn = self.variant == Variant::Annni;
        let graph = match (self.lattice, nnn) {
            (Geometry::Chain, false) => {
                if self.lx != 1 {
                    return Err(HarnessError::config("hamiltonian.lx", "a chain has lx = 1; its length is ly"));
                }
                build_chain(self.ly)
            }
            (Geometry::Chain, true) => {
                if self.lx != 1 {
                    return Err(HarnessError::config("hamiltonian.lx", "a chain has lx = 1; its length is ly"));
                }
                build_square(1, self.ly, true)
            }
            (Geometry::Square, nnn) => build_square(self.lx, self.ly, nnn),
        };
        graph.map_err(|e| HarnessError::config("hamiltonian.ly", e))
    }

    /// The Hamiltonian with disorder drawn from `disorder_seed` and the given
    /// fallback for an unset `z_field`.
    pub fn build(&self, default_z_field: f64) -> Result<HamiltonianSpec> {
        self.build_with(self.g, self.disorder_seed, default_z_field)
    }

    pub fn build_with(&self, g: f64, disorder_seed: u64, default_z_field: f64) -> Result<HamiltonianSpec> {
        let graph = self.graph()?;
        let h = match self.variant {
            Variant::Tim => HamiltonianSpec::tim(graph, g),
            Variant::Xxz => HamiltonianSpec::xxz(graph, g),
            Variant::Dtim => {
                let j = sample_disorder(&graph, disorder_seed);
                HamiltonianSpec::dtim(graph, g, j)
            }
            Variant::Annni => HamiltonianSpec::annni(graph, g, self.alpha),
        }
        .and_then(|h| h.with_z_field(self.z_field.unwrap_or(default_z_field)))
        .map_err(|e| HarnessError::config("hamiltonian", e))?;
        check_stoquastic(&h).map_err(|e| HarnessError::config("hamiltonian.g", e))?;
        Ok(h)
    }
}

impl ExperimentConfig {
    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<()> {
        self.hamiltonian.build(0.0)?;
        self.train.validate().map_err(|e| HarnessError::config("train", e))?;
        let o = &self.oracle;
        if o.ed_tol.is_nan() || o.ed_tol <= 0.0 {
            return Err(HarnessError::config("oracle.ed_tol", "must be positive"));
        }
        if !(o.weight_floor >= 0.0 && o.weight_floor < 1.0) {
            return Err(HarnessError::config("oracle.weight_floor", "must lie in [0, 1)"));
        }
        let hy = &self.hyperopt;
        let [a, b] = hy.alpha0_range;
        if !(a > 0.0 && a <= b && b.is_finite()) {
            return Err(HarnessError::config("hyperopt.alpha0_range", "need 0 < low <= high"));
        }
        let [c, d] = hy.gamma_range;
        if !(c > 0.0 && c <= d && d <= 1.0) {
            return Err(HarnessError::config("hyperopt.gamma_range", "need 0 < low <= high <= 1"));
        }
        if hy.samples == 0 {
            return Err(HarnessError::config("hyperopt.samples", "must be at least 1"));
        }
        if self.sweep.g_values.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(HarnessError::config("sweep.g_values", "field values must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(if path == "." { String::from("<root>") } else { path }, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies the global `--seed` / `--out` overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<&Path>) -> Self {
        if let Some(s) = seed {
            self.train.seed = s;
            self.search_seed = s;
        }
        if let Some(o) = out {
            self.output.run_dir = o.to_path_buf();
        }
        self
    }
}
