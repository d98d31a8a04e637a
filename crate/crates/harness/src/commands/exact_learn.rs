use super::write_text;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runlog::write_json;
use agm_core::exact::*;
use agm_core::hamiltonian::Variant;
use agm_core::math::sigmoid;
use serde::Serialize;

/// Largest system `exact-learn` accepts.
pub const MAX_LEARN_SITES: usize = 12;
/// Longitudinal field added to XXZ when the config leaves it unset.
pub const XXZ_DEFAULT_Z_FIELD: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct SiteReport {
    pub site: usize,
    pub max_order: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Largest `|P_fit(s_i = +1 | ctx) - P_exact(s_i = +1 | ctx)|`.
    pub conditional_error: f64,
    pub profile: Vec<OrderStatsRow>,
    /// Order-1 max-abs strictly above every higher order; `None` when the
    /// conditional has no order-1 terms.
    pub pairwise_dominant: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderStatsRow {
    pub order: usize,
    pub count: usize,
    pub max_abs: f64,
    pub l1: f64,
}

impl From<&OrderStats> for OrderStatsRow {
    fn from(o: &OrderStats) -> Self {
        OrderStatsRow { order: o.order, count: o.count, max_abs: o.max_abs, l1: o.l1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactLearnReport {
    pub n_sites: usize,
    pub energy: f64,
    pub z_field: f64,
    /// Weights raised to the floor before screening.
    pub floored_weights: usize,
    pub max_conditional_error: f64,
    pub sites: Vec<SiteReport>,
    pub aggregate: Vec<OrderStatsRow>,
}

fn dominance(profile: &[OrderStats]) -> Option<bool> {
    let first = profile.iter().find(|o| o.order == 1)?;
    let higher = profile.iter().filter(|o| o.order >= 2).map(|o| o.max_abs).fold(0.0, f64::max);
    Some(first.max_abs > higher)
}

/// `exact-learn`: ground state, weights, per-site screening, order profiles.
/// Writes `order_profile.csv`, `poly.csv`, `report.json` (and `weights.csv`
/// when requested) to the run directory.
pub fn cmd_exact_learn(cfg: &ExperimentConfig) -> Result<ExactLearnReport> {
    let default_z = if cfg.hamiltonian.variant == Variant::Xxz { XXZ_DEFAULT_Z_FIELD } else { 0.0 };
    let h = cfg.hamiltonian.build(default_z)?;
    let n = h.n_sites();
    if n > MAX_LEARN_SITES {
        return Err(HarnessError::config("hamiltonian", format!("exact learning is limited to {MAX_LEARN_SITES} sites, got {n}")));
    }
    let psi = ground_state_dense(&h, cfg.oracle.ed_tol)?;
    let w = WeightTable::from_state(&psi);
    let (wf, floored) = w.floored(cfg.oracle.weight_floor);
    if floored > 0 {
        log::warn!("{floored} zero weights floored at {:e}", cfg.oracle.weight_floor);
    }
    let mut sites = Vec::new();
    let mut polys = Vec::new();
    let mut profiles = Vec::new();
    for i in 0..n {
        let order = cfg.oracle.max_order.unwrap_or(n - 1 - i).min(n - 1 - i);
        let out = screen_exact(&wf, i, order)?;
        let exact = exact_conditionals(&w, i);
        let conditional_error = exact
            .p_up
            .iter()
            .enumerate()
            .filter_map(|(ctx, p)| p.map(|p| (sigmoid(2.0 * out.poly.evaluate(ctx)) - p).abs()))
            .fold(0.0, f64::max);
        let profile = order_profile(&out.poly);
        sites.push(SiteReport {
            site: i,
            max_order: order,
            objective: out.objective,
            gradient_norm: out.gradient_norm,
            iterations: out.iterations,
            conditional_error,
            profile: profile.iter().map(Into::into).collect(),
            pairwise_dominant: dominance(&profile),
        });
        profiles.push(profile);
        polys.push(out.poly);
    }
    let aggregate = aggregate_profiles(&profiles);
    let dir = &cfg.output.run_dir;
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let per_site: Vec<(usize, Vec<OrderStats>)> = profiles.into_iter().enumerate().collect();
    write_text(&dir.join("order_profile.csv"), &order_profile_csv(&per_site, &aggregate))?;
    write_text(&dir.join("poly.csv"), &poly_csv(&polys))?;
    if cfg.oracle.dump_weights {
        write_text(&dir.join("weights.csv"), &weights_csv(&w))?;
    }
    let report = ExactLearnReport {
        n_sites: n,
        energy: psi.energy,
        z_field: h.z_field,
        floored_weights: floored,
        max_conditional_error: sites.iter().map(|s| s.conditional_error).fold(0.0, f64::max),
        sites,
        aggregate: aggregate.iter().map(Into::into).collect(),
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}
