use crate::ansatz::{AgmParams, FieldCache, GroupElement, RatioTables, SampleState, SymmetryGroup};
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianSpec, Variant};
use crate::math::{log_sigmoid, logsumexp};
use crate::spin::SpinConfig;

/// The symmetry group used when training is symmetrized: the global spin
/// flip unless a longitudinal field breaks it, and the lattice reflections
/// unless disorder breaks them.
pub fn default_group(h: &HamiltonianSpec) -> SymmetryGroup {
    let n = h.n_sites();
    let (lx, ly) = (h.graph.lx, h.graph.ly);
    let mut gens = Vec::new();
    if h.z_field == 0.0 {
        gens.push(GroupElement::global_flip(n));
    }
    if h.variant != Variant::Dtim {
        gens.push(GroupElement::reflect_x(lx, ly));
        gens.push(GroupElement::reflect_y(lx, ly));
    }
    SymmetryGroup::generate(n, gens).expect("lattice symmetries are valid permutations")
}

/// Local energy of one sample, with what the gradient needs.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub energy: f64,
    /// Ratios that hit the overflow cap.
    pub capped: u32,
    /// Field caches of the group images with their softmax weights; a single
    /// entry of weight one without symmetrization.
    images: Vec<(FieldCache, f64)>,
}

impl Evaluation {
    /// Adds `weight * ∇ ln P(s)` (group-averaged when symmetrized) into `out`.
    pub fn accumulate_score(&self, p: &AgmParams, weight: f64, out: &mut [f64]) {
        for (c, w) in &self.images {
            p.accumulate_score(&c.x, &c.fields, weight * w, out);
        }
    }

    pub fn score(&self, p: &AgmParams) -> Vec<f64> {
        let mut out = vec![0.0; p.as_slice().len()];
        self.accumulate_score(p, 1.0, &mut out);
        out
    }
}

fn cached_log_prob(c: &FieldCache) -> f64 {
    c.x.iter().zip(&c.fields).map(|(x, f)| log_sigmoid(2.0 * x * f)).sum()
}

/// Local-energy evaluator for fixed parameters.
pub struct LocalEnergy<'a> {
    h: &'a HamiltonianSpec,
    p: &'a AgmParams,
    group: Option<&'a SymmetryGroup>,
    tables: RatioTables,
}

impl<'a> LocalEnergy<'a> {
    pub fn new(h: &'a HamiltonianSpec, p: &'a AgmParams, group: Option<&'a SymmetryGroup>) -> Result<Self> {
        if h.n_sites() != p.n() {
            return Err(Error::Shape { expected: h.n_sites(), got: p.n() });
        }
        if let Some(g) = group {
            if g.n() != p.n() {
                return Err(Error::Shape { expected: p.n(), got: g.n() });
            }
        }
        let group = group.filter(|g| !g.is_trivial());
        Ok(LocalEnergy { h, p, group, tables: RatioTables::new(p) })
    }

    pub fn evaluate(&self, s: &SpinConfig) -> Result<Evaluation> {
        s.ensure_len(self.p.n())?;
        match self.group {
            None => self.evaluate_plain(s, self.p.cache(s)),
            Some(g) => self.evaluate_symmetric(s, g),
        }
    }

    /// Like `evaluate`, reusing the field cache produced by the sampler.
    pub(crate) fn evaluate_sampled(&self, cache: FieldCache) -> Result<Evaluation> {
        let s = self.p.scatter(&cache.x);
        match self.group {
            None => self.evaluate_plain(&s, cache),
            Some(g) => self.evaluate_symmetric(&s, g),
        }
    }

    fn evaluate_plain(&self, s: &SpinConfig, cache: FieldCache) -> Result<Evaluation> {
        let p = self.p;
        let st = SampleState::new(cache);
        let mut energy = self.h.diagonal_raw(s.spins());
        let mut capped = 0;
        let mut pos = [0usize; 2];
        self.h.for_each_connection(s.spins(), |c| {
            let sites = c.flip.sites();
            for (q, &site) in pos.iter_mut().zip(sites) {
                *q = p.position(site);
            }
            let (r, hit) = st.ratio(p, &self.tables, &mut pos[..sites.len()]);
            capped += hit as u32;
            energy += c.element * r.sqrt();
        });
        if !energy.is_finite() {
            return Err(fault(s));
        }
        Ok(Evaluation { energy, capped, images: vec![(st.cache, 1.0)] })
    }

    fn evaluate_symmetric(&self, s: &SpinConfig, group: &SymmetryGroup) -> Result<Evaluation> {
        let p = self.p;
        let states: Vec<SampleState> =
            group.elements().iter().map(|g| SampleState::new(p.cache(&g.apply(s)))).collect();
        let lps: Vec<f64> = states.iter().map(|st| cached_log_prob(&st.cache)).collect();
        let norm = logsumexp(&lps);
        let weights: Vec<f64> = lps.iter().map(|lp| (lp - norm).exp()).collect();

        let mut energy = self.h.diagonal_raw(s.spins());
        let mut capped = 0;
        let mut mapped = Vec::with_capacity(2);
        self.h.for_each_connection(s.spins(), |c| {
            // P_G(s') / P_G(s) = Σ_g w_g P(g s') / P(g s)
            let mut r = 0.0;
            for ((g, st), w) in group.elements().iter().zip(&states).zip(&weights) {
                g.map_flips(c.flip.sites(), &mut mapped);
                for q in mapped.iter_mut() {
                    *q = p.position(*q);
                }
                let (rg, hit) = st.ratio(p, &self.tables, &mut mapped);
                capped += hit as u32;
                r += w * rg;
            }
            energy += c.element * r.sqrt();
        });
        if !energy.is_finite() {
            return Err(fault(s));
        }
        let images = states.into_iter().map(|st| st.cache).zip(weights).collect();
        Ok(Evaluation { energy, capped, images })
    }
}

fn fault(s: &SpinConfig) -> Error {
    Error::Numeric(format!("non-finite local energy at configuration {}", s.to_pm_string()))
}

/// `E_loc(s) = Σ_{s'} H[s, s'] sqrt(P(s') / P(s))`, with `P` replaced by its
/// group average when a group is given.
pub fn local_energy(h: &HamiltonianSpec, p: &AgmParams, s: &SpinConfig, group: Option<&SymmetryGroup>) -> Result<f64> {
    Ok(LocalEnergy::new(h, p, group)?.evaluate(s)?.energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{init_params, sym_log_prob};
    use crate::lattice::{build_chain, build_square};
    use crate::spin::all_configs;

    #[test]
    fn zero_params_examples() {
        let h = HamiltonianSpec::tim(build_chain(1).unwrap(), 0.7).unwrap();
        let p = AgmParams::zeros(1);
        for s in all_configs(1) {
            assert!((local_energy(&h, &p, &s, None).unwrap() + 0.7).abs() < 1e-15);
        }
        let h = HamiltonianSpec::tim(build_square(2, 3, false).unwrap(), 1.3).unwrap();
        let p = AgmParams::zeros(6);
        for s in all_configs(6) {
            let e = local_energy(&h, &p, &s, None).unwrap();
            assert!((e - (h.diagonal_energy(&s).unwrap() - 1.3 * 6.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_matches_direct_ratios() {
        let h = HamiltonianSpec::xxz(build_chain(5).unwrap(), 0.8).unwrap();
        let g = default_group(&h);
        assert_eq!(g.len(), 4);
        let p = init_params(5, 0.7, 4).unwrap();
        for s in all_configs(5) {
            let lp = sym_log_prob(&p, &g, &s).unwrap();
            let mut direct = h.diagonal_energy(&s).unwrap();
            for (t, v) in h.connected_configs(&s).unwrap() {
                direct += v * (0.5 * (sym_log_prob(&p, &g, &t).unwrap() - lp)).exp();
            }
            let fast = local_energy(&h, &p, &s, Some(&g)).unwrap();
            assert!((fast - direct).abs() < 1e-11, "{fast} vs {direct}");
        }
    }

    #[test]
    fn groups_follow_the_hamiltonian() {
        let sq = build_square(3, 3, false).unwrap();
        assert_eq!(default_group(&HamiltonianSpec::tim(sq.clone(), 1.0).unwrap()).len(), 8);
        let j = vec![1.0; sq.nn_bonds.len()];
        assert_eq!(default_group(&HamiltonianSpec::dtim(sq.clone(), 1.0, j).unwrap()).len(), 2);
        let h = HamiltonianSpec::tim(sq, 1.0).unwrap().with_z_field(0.1).unwrap();
        assert_eq!(default_group(&h).len(), 4);
    }
}
