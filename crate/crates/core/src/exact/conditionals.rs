//! Weight tables and their exact autoregressive conditionals.
//!
//! For conditional `i` a context is the assignment of the later sites
//! `i+1 .. n-1`; context index bit `b` refers to site `i + 1 + b` (set means
//! spin -1), matching the basis-index convention.

use super::{ensure_dense, DenseState};
use crate::ansatz::AgmParams;
use crate::error::{Error, Result};
use crate::spin::SpinConfig;

/// Probability weights over the `2^n` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    n: usize,
    weights: Vec<f64>,
}

impl WeightTable {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        ensure_dense(n)?;
        if weights.len() != 1 << n {
            return Err(Error::Shape { expected: 1 << n, got: weights.len() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        Ok(WeightTable { n, weights })
    }

    /// `w(s) = ψ(s)^2`.
    pub fn from_state(psi: &DenseState) -> Self {
        WeightTable { n: psi.n, weights: psi.amplitudes.iter().map(|a| a * a).collect() }
    }

    /// Exhaustive `P(s)` of an AGM.
    pub fn from_agm(p: &AgmParams) -> Result<Self> {
        ensure_dense(p.n())?;
        let w = (0..1usize << p.n())
            .map(|idx| p.log_prob_raw(SpinConfig::from_index(idx, p.n()).spins()).exp())
            .collect();
        Ok(WeightTable { n: p.n(), weights: w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Copy with every weight raised to at least `floor`, plus the number of
    /// entries that were raised.
    pub fn floored(&self, floor: f64) -> (WeightTable, usize) {
        let mut raised = 0;
        let weights = self
            .weights
            .iter()
            .map(|&w| {
                if w < floor {
                    raised += 1;
                    floor
                } else {
                    w
                }
            })
            .collect();
        (WeightTable { n: self.n, weights }, raised)
    }

    pub fn n_contexts(&self, site: usize) -> usize {
        1 << (self.n - site - 1)
    }

    /// Aggregated weights `(w+, w-)` per context of conditional `site`,
    /// marginalizing the earlier sites.
    pub fn context_marginals(&self, site: usize) -> (Vec<f64>, Vec<f64>) {
        assert!(site < self.n, "site {site} out of range");
        let n_ctx = self.n_contexts(site);
        let mut plus = vec![0.0; n_ctx];
        let mut minus = vec![0.0; n_ctx];
        for (idx, &w) in self.weights.iter().enumerate() {
            let ctx = idx >> (site + 1);
            if (idx >> site) & 1 == 0 {
                plus[ctx] += w;
            } else {
                minus[ctx] += w;
            }
        }
        (plus, minus)
    }

    /// Spins of the later sites for a context of conditional `site`.
    pub fn context_spins(&self, site: usize, ctx: usize) -> Vec<i8> {
        (0..self.n - site - 1).map(|b| if (ctx >> b) & 1 == 1 { -1 } else { 1 }).collect()
    }
}

/// `P(s_site = +1 | context)` for every context; `None` marks zero-mass contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub site: usize,
    pub p_up: Vec<Option<f64>>,
}

impl ConditionalTable {
    /// `P(s_site = value | context)`.
    pub fn prob(&self, ctx: usize, value: i8) -> Option<f64> {
        self.p_up[ctx].map(|p| if value > 0 { p } else { 1.0 - p })
    }

    pub fn flagged(&self) -> usize {
        self.p_up.iter().filter(|p| p.is_none()).count()
    }
}

pub fn exact_conditionals(w: &WeightTable, site: usize) -> ConditionalTable {
    let (plus, minus) = w.context_marginals(site);
    let p_up = plus
        .iter()
        .zip(&minus)
        .map(|(&a, &b)| if a + b > 0.0 { Some(a / (a + b)) } else { None })
        .collect();
    ConditionalTable { site, p_up }
}

/// `F*(ctx) = ½ ln(w+(ctx) / w-(ctx))`, the per-context minimizer of the
/// screening objective.
pub fn closed_form_conditional_energy(w: &WeightTable, site: usize) -> Result<Vec<f64>> {
    let (plus, minus) = w.context_marginals(site);
    plus.iter()
        .zip(&minus)
        .enumerate()
        .map(|(ctx, (&a, &b))| {
            if a > 0.0 && b > 0.0 {
                Ok(0.5 * (a / b).ln())
            } else {
                Err(Error::DegenerateContext { site, context: w.context_spins(site, ctx) })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sigmoid;

    #[test]
    fn uniform_table() {
        let w = WeightTable::new(3, vec![0.125; 8]).unwrap();
        for i in 0..3 {
            assert!(exact_conditionals(&w, i).p_up.iter().all(|&p| p == Some(0.5)));
            assert!(closed_form_conditional_energy(&w, i).unwrap().iter().all(|&f| f == 0.0));
        }
    }

    #[test]
    fn deterministic_table() {
        let mut v = vec![0.0; 8];
        v[SpinConfig::new(vec![1, -1, 1]).unwrap().index()] = 1.0;
        let w = WeightTable::new(3, v).unwrap();
        let c0 = exact_conditionals(&w, 0);
        // context (s1, s2) = (-1, +1) has index 1
        assert_eq!(c0.p_up[1], Some(1.0));
        assert_eq!(c0.flagged(), 3);
        let c1 = exact_conditionals(&w, 1);
        assert_eq!(c1.prob(0, -1), Some(1.0));
        assert!(matches!(closed_form_conditional_energy(&w, 0), Err(Error::DegenerateContext { site: 0, .. })));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn closed_form_value() {
        // w+ = 0.8, w- = 0.2 for the single context of the last site
        let w = WeightTable::new(1, vec![0.8, 0.2]).unwrap();
        let f = closed_form_conditional_energy(&w, 0).unwrap();
        assert!((f[0] - 0.5 * 4f64.ln()).abs() < 1e-15);
        assert!((f[0] - 0.693147).abs() < 1e-6);
        let c = exact_conditionals(&w, 0);
        assert!((sigmoid(2.0 * f[0]) - c.p_up[0].unwrap()).abs() < 1e-15);
    }

    #[test]
    fn validation_and_floor() {
        assert!(WeightTable::new(2, vec![0.5; 3]).is_err());
        assert!(WeightTable::new(1, vec![-0.1, 1.1]).is_err());
        let w = WeightTable::new(1, vec![1.0, 0.0]).unwrap();
        let (f, raised) = w.floored(1e-12);
        assert_eq!(raised, 1);
        assert!(closed_form_conditional_energy(&f, 0).is_ok());
    }
}
