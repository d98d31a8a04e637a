//! Exact interaction screening.
//!
//! For conditional `i` the energy `F_i(s_{>i}) = Σ_S θ_S Π_{j∈S} s_j` runs over
//! subsets `S` of the later sites up to a maximum size. The coefficients
//! minimize the convex objective
//!
//! ```text
//! L(θ) = Σ_s w(s) exp(-s_i F_i(s_{>i}; θ)) = Σ_ctx w+(ctx) e^{-F(ctx)} + w-(ctx) e^{F(ctx)}
//! ```
//!
//! which this module solves by damped Newton iterations with an Armijo
//! backtracking line search.

use super::WeightTable;
use crate::ansatz::AgmParams;
use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use std::collections::BTreeMap;

/// Newton iterations stop once `‖∇L‖_2` drops below this.
pub const NEWTON_GRAD_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

/// A sparse polynomial energy of conditional `owner` over later sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyEnergy {
    pub owner: usize,
    pub n: usize,
    /// Largest subset size in the basis the polynomial was fitted in.
    pub max_order: usize,
    /// Sorted site subsets (all `> owner`; the empty set is the constant).
    pub terms: BTreeMap<Vec<usize>, f64>,
}

impl PolyEnergy {
    /// `F(ctx)` for a context index of conditional `owner`.
    pub fn evaluate(&self, ctx: usize) -> f64 {
        self.terms
            .iter()
            .map(|(set, c)| {
                let flips = set.iter().filter(|&&j| (ctx >> (j - self.owner - 1)) & 1 == 1).count();
                if flips % 2 == 0 {
                    *c
                } else {
                    -*c
                }
            })
            .sum()
    }

    pub fn coefficient(&self, subset: &[usize]) -> f64 {
        self.terms.get(subset).copied().unwrap_or(0.0)
    }

    /// Terms ordered by subset size, then lexicographically.
    pub fn sorted_terms(&self) -> Vec<(&Vec<usize>, f64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, &c)| (k, c)).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }
}

/// Summary of the coefficients of one interaction order (subset size).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStats {
    pub order: usize,
    pub count: usize,
    pub max_abs: f64,
    pub l1: f64,
}

pub fn order_profile(pe: &PolyEnergy) -> Vec<OrderStats> {
    let top = pe.terms.keys().map(Vec::len).max().unwrap_or(0).max(pe.max_order);
    let mut out: Vec<OrderStats> =
        (0..=top).map(|order| OrderStats { order, count: 0, max_abs: 0.0, l1: 0.0 }).collect();
    for (set, c) in &pe.terms {
        let o = &mut out[set.len()];
        o.count += 1;
        o.max_abs = o.max_abs.max(c.abs());
        o.l1 += c.abs();
    }
    out
}

/// Combines per-conditional profiles: max of `max_abs`, sum of `l1` and counts.
pub fn aggregate_profiles(profiles: &[Vec<OrderStats>]) -> Vec<OrderStats> {
    let top = profiles.iter().map(Vec::len).max().unwrap_or(0);
    (0..top)
        .map(|order| {
            let mut agg = OrderStats { order, count: 0, max_abs: 0.0, l1: 0.0 };
            for s in profiles.iter().filter_map(|p| p.get(order)) {
                agg.count += s.count;
                agg.max_abs = agg.max_abs.max(s.max_abs);
                agg.l1 += s.l1;
            }
            agg
        })
        .collect()
}

/// The screening objective for one conditional, restricted to subsets of
/// size at most `max_order`.
#[derive(Debug, Clone)]
pub struct ScreeningProblem {
    site: usize,
    n: usize,
    max_order: usize,
    /// Subsets as bitmasks over context bits.
    subsets: Vec<usize>,
    plus: DVector<f64>,
    minus: DVector<f64>,
    /// `design[(ctx, k)] = Π_{j ∈ subsets[k]} s_j(ctx)`.
    design: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct ScreenOutcome {
    pub poly: PolyEnergy,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

impl ScreeningProblem {
    pub fn new(w: &WeightTable, site: usize, max_order: usize) -> Result<Self> {
        let n = w.n();
        if site >= n {
            return Err(Error::InvalidInput(format!("conditional {site} out of range for n = {n}")));
        }
        let m = n - site - 1;
        if max_order > m {
            return Err(Error::InvalidInput(format!(
                "max_order {max_order} exceeds the {m} later sites of conditional {site}"
            )));
        }
        let n_ctx = 1usize << m;
        let mut subsets: Vec<usize> = (0..n_ctx).filter(|s| s.count_ones() as usize <= max_order).collect();
        subsets.sort_by_key(|&s| (s.count_ones(), s));
        let (plus, minus) = w.context_marginals(site);
        if subsets.len() == n_ctx {
            for ctx in 0..n_ctx {
                if plus[ctx] <= 0.0 || minus[ctx] <= 0.0 {
                    return Err(Error::DegenerateContext { site, context: w.context_spins(site, ctx) });
                }
            }
        }
        let design = DMatrix::from_fn(n_ctx, subsets.len(), |ctx, k| {
            if (ctx & subsets[k]).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        });
        Ok(ScreeningProblem {
            site,
            n,
            max_order,
            subsets,
            plus: DVector::from_vec(plus),
            minus: DVector::from_vec(minus),
            design,
        })
    }

    pub fn n_params(&self) -> usize {
        self.subsets.len()
    }

    pub fn objective(&self, theta: &[f64]) -> f64 {
        let f = &self.design * DVector::from_column_slice(theta);
        self.objective_at(&f)
    }

    fn objective_at(&self, f: &DVector<f64>) -> f64 {
        f.iter()
            .zip(self.plus.iter().zip(self.minus.iter()))
            .map(|(f, (p, m))| p * (-f).exp() + m * f.exp())
            .sum()
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let f = &self.design * DVector::from_column_slice(theta);
        self.gradient_at(&f).as_slice().to_vec()
    }

    fn gradient_at(&self, f: &DVector<f64>) -> DVector<f64> {
        let r = DVector::from_iterator(
            f.len(),
            f.iter()
                .zip(self.plus.iter().zip(self.minus.iter()))
                .map(|(f, (p, m))| -p * (-f).exp() + m * f.exp()),
        );
        self.design.tr_mul(&r)
    }

    fn hessian_at(&self, f: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = self.design.clone();
        for (ctx, fv) in f.iter().enumerate() {
            let d = (self.plus[ctx] * (-fv).exp() + self.minus[ctx] * fv.exp()).sqrt();
            scaled.row_mut(ctx).scale_mut(d);
        }
        scaled.tr_mul(&scaled)
    }

    pub fn solve(&self) -> Result<ScreenOutcome> {
        let k = self.n_params();
        let mut theta = DVector::zeros(k);
        let mut f = &self.design * &theta;
        let mut obj = self.objective_at(&f);
        for it in 0..MAX_ITERATIONS {
            let grad = self.gradient_at(&f);
            let gnorm = grad.norm();
            if gnorm < NEWTON_GRAD_TOL {
                return Ok(ScreenOutcome { poly: self.to_poly(theta.as_slice()), objective: obj, gradient_norm: gnorm, iterations: it });
            }
            let hess = self.hessian_at(&f);
            let dir = newton_direction(hess, &grad);
            let slope = grad.dot(&dir);
            let mut step = 1.0;
            loop {
                let trial = &theta + &dir * step;
                let f_trial = &self.design * &trial;
                let obj_trial = self.objective_at(&f_trial);
                // near the optimum the decrease drowns in rounding; fall back
                // to requiring a smaller gradient
                let armijo = obj_trial <= obj + 1e-4 * step * slope;
                let flat = (obj_trial - obj).abs() <= 1e-14 * obj.abs()
                    && self.gradient_at(&f_trial).norm() < gnorm;
                if armijo || flat {
                    theta = trial;
                    f = f_trial;
                    obj = obj_trial;
                    break;
                }
                step *= 0.5;
                if step < 1e-30 {
                    return Err(Error::Numeric(format!(
                        "screening line search stalled for conditional {} at gradient norm {gnorm:e}",
                        self.site
                    )));
                }
            }
        }
        Err(Error::Numeric(format!("screening did not converge for conditional {}", self.site)))
    }

    fn to_poly(&self, theta: &[f64]) -> PolyEnergy {
        let terms = self
            .subsets
            .iter()
            .zip(theta)
            .map(|(&mask, &c)| {
                let set = (0..self.n - self.site - 1).filter(|b| (mask >> b) & 1 == 1).map(|b| self.site + 1 + b).collect();
                (set, c)
            })
            .collect();
        PolyEnergy { owner: self.site, n: self.n, max_order: self.max_order, terms }
    }
}

fn newton_direction(mut hess: DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let mut ridge = 0.0;
    let scale = hess.diagonal().max().max(f64::MIN_POSITIVE);
    loop {
        if let Some(ch) = Cholesky::new(hess.clone()) {
            return -ch.solve(grad);
        }
        // singular along directions the weights do not constrain
        let next = if ridge == 0.0 { 1e-14 * scale } else { ridge * 10.0 };
        for i in 0..hess.nrows() {
            hess[(i, i)] += next - ridge;
        }
        ridge = next;
        if ridge > scale {
            return -grad.clone();
        }
    }
}

/// Minimizes the screening objective of conditional `site` over all subsets
/// of size at most `max_order`.
pub fn screen_exact(w: &WeightTable, site: usize, max_order: usize) -> Result<ScreenOutcome> {
    ScreeningProblem::new(w, site, max_order)?.solve()
}

/// The pairwise model (identity order) whose conditionals best fit `w`:
/// every conditional screened with subsets of size at most one. Exact when
/// `w` itself comes from such a model.
pub fn fit_pairwise(w: &WeightTable) -> Result<AgmParams> {
    let n = w.n();
    let mut p = AgmParams::zeros(n);
    for i in 0..n {
        let poly = screen_exact(w, i, 1.min(n - 1 - i))?.poly;
        p.set_bias(i, poly.coefficient(&[]));
        for j in i + 1..n {
            p.set_pair(i, j, poly.coefficient(&[j]));
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::closed_form_conditional_energy;

    fn product_table(biases: &[f64]) -> WeightTable {
        let n = biases.len();
        let w = (0..1usize << n)
            .map(|idx| {
                biases
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let s = if (idx >> i) & 1 == 1 { -1.0 } else { 1.0 };
                        (s * b).exp() / (2.0 * b.cosh())
                    })
                    .product()
            })
            .collect();
        WeightTable::new(n, w).unwrap()
    }

    #[test]
    fn product_distribution_has_no_interactions() {
        let w = product_table(&[0.3, -0.7, 0.1, 1.2]);
        for i in 0..4 {
            let out = screen_exact(&w, i, 3 - i).unwrap();
            for (set, c) in &out.poly.terms {
                if set.is_empty() {
                    assert!((c - [0.3, -0.7, 0.1, 1.2][i]).abs() < 1e-8);
                } else {
                    assert!(c.abs() < 1e-8, "{set:?} = {c}");
                }
            }
            assert!(out.gradient_norm < NEWTON_GRAD_TOL);
        }
    }

    #[test]
    fn full_order_matches_closed_form() {
        let raw: Vec<f64> = (0..32).map(|k| 1.0 + ((k * 7919) % 13) as f64).collect();
        let total: f64 = raw.iter().sum();
        let w = WeightTable::new(5, raw.iter().map(|x| x / total).collect()).unwrap();
        for i in 0..5 {
            let out = screen_exact(&w, i, 4 - i).unwrap();
            let exact = closed_form_conditional_energy(&w, i).unwrap();
            for (ctx, f) in exact.iter().enumerate() {
                assert!((out.poly.evaluate(ctx) - f).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn degenerate_full_order_is_reported() {
        let mut v = vec![0.25; 4];
        v[0b01] = 0.0; // s0 = -1, s1 = +1
        let w = WeightTable::new(2, v).unwrap();
        let err = screen_exact(&w, 0, 1).unwrap_err();
        assert_eq!(err, Error::DegenerateContext { site: 0, context: vec![1] });
        assert!(screen_exact(&w, 0, 2).is_err());
    }

    #[test]
    fn converges_when_the_objective_is_flat_to_rounding() {
        // this instance used to creep along with tiny Armijo steps
        let p = crate::ansatz::init_params(6, 0.6, 33).unwrap();
        let w = WeightTable::from_agm(&p).unwrap();
        let out = screen_exact(&w, 4, 1).unwrap();
        assert!(out.iterations < 50);
        assert!((out.poly.coefficient(&[5]) - p.pair(4, 5)).abs() < 1e-12);
    }

    #[test]
    fn profile_example() {
        let mut terms = BTreeMap::new();
        terms.insert(vec![], 0.5);
        terms.insert(vec![2], -0.3);
        terms.insert(vec![2, 3], 0.1);
        let pe = PolyEnergy { owner: 1, n: 4, max_order: 2, terms };
        let prof = order_profile(&pe);
        assert_eq!(prof.iter().map(|o| o.max_abs).collect::<Vec<_>>(), vec![0.5, 0.3, 0.1]);
        assert_eq!(prof[1].l1, 0.3);
        let agg = aggregate_profiles(&[prof.clone(), prof]);
        assert_eq!(agg[2].count, 2);
        assert!((agg[0].l1 - 1.0).abs() < 1e-15);
    }
}
