//! The pairwise autoregressive graphical model (AGM).
//!
//! The distribution factorizes along a conditioning order as
//! `P(s) = Π_i P(s_i | s_{>i})` with
//!
//! ```text
//! P(s_i | s_{>i}) = 1 / (1 + exp(-2 s_i f_i)),   f_i = bias_i + Σ_{j>i} pair(i, j) s_j
//! ```
//!
//! Indices `i, j` are positions in the conditioning order. The default order
//! is the identity (position `i` is lattice site `i`); a custom order maps
//! position `p` to site `order[p]`.

mod fast;
mod symmetry;

pub use fast::{RatioTables, SampleState, MAX_HALF_LOG_RATIO};
pub use symmetry::{sym_grad_log_prob, sym_log_prob, sym_sample, GroupElement, SymmetryGroup};

use crate::error::{Error, Result};
use crate::math::{dot, log_sigmoid, sigmoid};
use crate::rng::{self, tag};
use crate::spin::SpinConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Parameters of the AGM: one bias per conditional and a strictly
/// upper-triangular pair matrix, stored as a single flat vector
/// `[bias_0 .. bias_{n-1} | pair(0,1) .. pair(0,n-1) | pair(1,2) .. ]`.
///
/// Gradients share this layout, so the same type doubles as a gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct AgmParams {
    n: usize,
    order: Vec<usize>,
    position: Vec<usize>,
    theta: Vec<f64>,
}

/// A gradient with respect to [`AgmParams`], in the same layout.
pub type AgmGradient = AgmParams;

/// Spins in conditioning order together with their conditional fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCache {
    pub x: Vec<f64>,
    pub fields: Vec<f64>,
}

#[inline]
pub(crate) fn pair_offset(n: usize, i: usize) -> usize {
    n + i * (2 * n - i - 1) / 2
}

pub fn n_params(n: usize) -> usize {
    n + n * n.saturating_sub(1) / 2
}

impl AgmParams {
    /// All-zero parameters: the uniform distribution.
    pub fn zeros(n: usize) -> Self {
        AgmParams {
            n,
            order: (0..n).collect(),
            position: (0..n).collect(),
            theta: vec![0.0; n_params(n)],
        }
    }

    /// Builds parameters from a flat vector in the documented layout.
    pub fn from_flat(n: usize, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != n_params(n) {
            return Err(Error::Shape { expected: n_params(n), got: theta.len() });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        let mut p = Self::zeros(n);
        p.theta = theta;
        Ok(p)
    }

    /// Replaces the conditioning order; `order[p]` is the site at position `p`.
    pub fn with_order(mut self, order: Vec<usize>) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::Shape { expected: self.n, got: order.len() });
        }
        let mut position = vec![usize::MAX; self.n];
        for (p, &site) in order.iter().enumerate() {
            if site >= self.n || position[site] != usize::MAX {
                return Err(Error::InvalidInput("order is not a permutation".into()));
            }
            position[site] = p;
        }
        self.order = order;
        self.position = position;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of `site` in the conditioning order.
    #[inline]
    pub fn position(&self, site: usize) -> usize {
        self.position[site]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.theta[i]
    }

    pub fn set_bias(&mut self, i: usize, v: f64) {
        self.theta[i] = v;
    }

    /// `pair(i, j)` for `j > i`.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        assert!(j > i && j < self.n, "pair({i}, {j}) is outside the upper triangle");
        self.theta[pair_offset(self.n, i) + j - i - 1]
    }

    pub fn set_pair(&mut self, i: usize, j: usize, v: f64) {
        assert!(j > i && j < self.n, "pair({i}, {j}) is outside the upper triangle");
        let k = pair_offset(self.n, i) + j - i - 1;
        self.theta[k] = v;
    }

    /// Coefficients `pair(i, i+1 ..)` of conditional `i`.
    #[inline]
    pub fn pair_row(&self, i: usize) -> &[f64] {
        let start = pair_offset(self.n, i);
        &self.theta[start..start + self.n - i - 1]
    }

    pub fn bias_slice(&self) -> &[f64] {
        &self.theta[..self.n]
    }

    pub fn pair_slice(&self) -> &[f64] {
        &self.theta[self.n..]
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|t| t.is_finite())
    }

    /// Zero array with the same shape and order.
    pub fn zeros_like(&self) -> Self {
        AgmParams {
            n: self.n,
            order: self.order.clone(),
            position: self.position.clone(),
            theta: vec![0.0; self.theta.len()],
        }
    }

    pub fn norm(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    /// Spins of `s` rearranged into conditioning order.
    pub fn gather(&self, s: &[i8]) -> Vec<f64> {
        self.order.iter().map(|&site| s[site] as f64).collect()
    }

    /// Lattice configuration from spins in conditioning order.
    pub fn scatter(&self, x: &[f64]) -> SpinConfig {
        let mut out = vec![1i8; self.n];
        for (p, &site) in self.order.iter().enumerate() {
            out[site] = if x[p] > 0.0 { 1 } else { -1 };
        }
        SpinConfig::from_raw(out)
    }

    /// Conditional fields `f_i` for spins `x` in conditioning order.
    pub fn fields(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.field(i, x)).collect()
    }

    #[inline]
    fn field(&self, i: usize, x: &[f64]) -> f64 {
        let row = self.pair_row(i);
        self.theta[i] + dot(row, &x[i + 1..])
    }

    pub fn cache(&self, s: &SpinConfig) -> FieldCache {
        let x = self.gather(s.spins());
        let fields = self.fields(&x);
        FieldCache { x, fields }
    }

    /// `P(s_i | s_{>i})` for the conditional at position `i`.
    pub fn conditional_prob(&self, i: usize, s: &SpinConfig) -> Result<f64> {
        s.ensure_len(self.n)?;
        if i >= self.n {
            return Err(Error::InvalidInput(format!("conditional {i} out of range")));
        }
        let x = self.gather(s.spins());
        Ok(sigmoid(2.0 * x[i] * self.field(i, &x)))
    }

    pub fn log_prob(&self, s: &SpinConfig) -> Result<f64> {
        s.ensure_len(self.n)?;
        Ok(self.log_prob_raw(s.spins()))
    }

    pub(crate) fn log_prob_raw(&self, s: &[i8]) -> f64 {
        let x = self.gather(s);
        self.log_prob_positions(&x)
    }

    pub(crate) fn log_prob_positions(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| log_sigmoid(2.0 * x[i] * self.field(i, x))).sum()
    }

    /// `∇_θ ln P(s)`.
    pub fn grad_log_prob(&self, s: &SpinConfig) -> Result<AgmGradient> {
        s.ensure_len(self.n)?;
        let cache = self.cache(s);
        let mut g = self.zeros_like();
        self.accumulate_score(&cache.x, &cache.fields, 1.0, &mut g.theta);
        Ok(g)
    }

    /// Adds `weight * ∇_θ ln P` at spins `x` (conditioning order) into `out`.
    #[inline]
    pub fn accumulate_score(&self, x: &[f64], fields: &[f64], weight: f64, out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            // d ln σ(2 x f) / d f = 2 x σ(-2 x f)
            let c = weight * 2.0 * x[i] * sigmoid(-2.0 * x[i] * fields[i]);
            out[i] += c;
            let start = pair_offset(n, i);
            for (o, s) in out[start..start + n - i - 1].iter_mut().zip(&x[i + 1..]) {
                *o += c * s;
            }
        }
    }

    /// `ln P(s') - ln P(s)` where `s'` is `s` with `flips` (lattice sites)
    /// reversed, using the cached fields of `s`.
    pub fn log_prob_delta(&self, cache: &FieldCache, flips: &[usize]) -> f64 {
        debug_assert!(!flips.is_empty());
        debug_assert!(
            self.fields(&cache.x).iter().zip(&cache.fields).all(|(a, b)| !a.is_finite() || (a - b).abs() <= 1e-9 * (1.0 + a.abs())),
            "field cache is inconsistent with its configuration"
        );
        let mut pos: Vec<usize> = flips.iter().map(|&s| self.position[s]).collect();
        pos.sort_unstable();
        let last = *pos.last().expect("flips must be nonempty");
        let x = &cache.x;
        let mut delta = 0.0;
        for i in 0..=last {
            let mut f_new = cache.fields[i];
            for &k in pos.iter().filter(|&&k| k > i) {
                f_new -= 2.0 * self.pair(i, k) * x[k];
            }
            let x_new = if pos.binary_search(&i).is_ok() { -x[i] } else { x[i] };
            delta += log_sigmoid(2.0 * x_new * f_new) - log_sigmoid(2.0 * x[i] * cache.fields[i]);
        }
        delta
    }

    /// Draws one configuration by ancestral sampling, writing spins (in
    /// conditioning order) and the matching fields.
    pub fn sample_positions(&self, rng: &mut ChaCha8Rng, x: &mut [f64], fields: &mut [f64]) {
        for i in (0..self.n).rev() {
            let f = self.field(i, x);
            fields[i] = f;
            x[i] = if rng.gen::<f64>() < sigmoid(2.0 * f) { 1.0 } else { -1.0 };
        }
    }

    /// Draws sample number `index` of the stream `(seed, stream)`.
    pub fn sample_keyed(&self, seed: u64, stream: u64, index: u64) -> FieldCache {
        let mut rng = rng::substream(seed, &[tag::SAMPLE, stream, index]);
        let mut x = vec![0.0; self.n];
        let mut fields = vec![0.0; self.n];
        self.sample_positions(&mut rng, &mut x, &mut fields);
        FieldCache { x, fields }
    }

    /// `count` i.i.d. exact samples; sample `k` uses substream `(seed, k)`.
    pub fn sample_batch(&self, count: usize, seed: u64) -> Vec<SpinConfig> {
        (0..count as u64)
            .map(|k| self.scatter(&self.sample_keyed(seed, 0, k).x))
            .collect()
    }
}

/// Parameters with every entry drawn from `N(0, sigma0^2)`.
pub fn init_params(n: usize, sigma0: f64, seed: u64) -> Result<AgmParams> {
    if !(sigma0 >= 0.0 && sigma0.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma0 = {sigma0} must be finite and >= 0")));
    }
    let mut p = AgmParams::zeros(n);
    if sigma0 > 0.0 {
        let normal = Normal::new(0.0, sigma0).expect("valid normal");
        let mut rng = rng::substream(seed, &[tag::INIT]);
        for t in p.theta.iter_mut() {
            *t = normal.sample(&mut rng);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::all_configs;

    fn cfg(v: &[i8]) -> SpinConfig {
        SpinConfig::new(v.to_vec()).unwrap()
    }

    #[test]
    fn layout_offsets() {
        let mut p = AgmParams::zeros(4);
        assert_eq!(p.as_slice().len(), 4 + 6);
        p.set_pair(0, 3, 1.5);
        p.set_pair(2, 3, -0.5);
        assert_eq!(p.as_slice()[4 + 2], 1.5);
        assert_eq!(p.as_slice()[9], -0.5);
        assert_eq!(p.pair_row(1).len(), 2);
    }

    #[test]
    #[should_panic]
    fn lower_triangle_is_absent() {
        AgmParams::zeros(3).pair(2, 1);
    }

    #[test]
    fn init_examples() {
        let z = init_params(5, 0.0, 3).unwrap();
        assert!(z.as_slice().iter().all(|&t| t == 0.0));
        assert_eq!(init_params(6, 0.1, 9).unwrap(), init_params(6, 0.1, 9).unwrap());
        assert!(init_params(3, -1.0, 0).is_err());
        // 141 + 141*140/2 = 10_011 entries
        let p = init_params(141, 0.01, 77).unwrap();
        let m = p.as_slice().len() as f64;
        let sd = (p.as_slice().iter().map(|t| t * t).sum::<f64>() / m).sqrt();
        assert!((sd - 0.01).abs() < 0.001, "sample std {sd}");
    }

    #[test]
    fn conditional_examples() {
        let p = AgmParams::zeros(3);
        assert_eq!(p.conditional_prob(1, &cfg(&[1, -1, 1])).unwrap(), 0.5);
        let mut p = AgmParams::zeros(3);
        p.set_bias(2, 0.3);
        let v = p.conditional_prob(2, &cfg(&[-1, -1, 1])).unwrap();
        assert!((v - 1.0 / (1.0 + (-0.6f64).exp())).abs() < 1e-15);
        let mut p = AgmParams::zeros(2);
        p.set_pair(0, 1, 0.5);
        let v = p.conditional_prob(0, &cfg(&[1, -1])).unwrap();
        assert!((v - 1.0 / (1.0 + 1f64.exp())).abs() < 1e-15);
        assert!((v - 0.268941).abs() < 1e-6);
        let w = p.conditional_prob(0, &cfg(&[-1, -1])).unwrap();
        assert!((v + w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_prob_examples() {
        let p = AgmParams::zeros(5);
        let lp = p.log_prob(&cfg(&[1, -1, 1, 1, -1])).unwrap();
        assert!((lp + 5.0 * std::f64::consts::LN_2).abs() < 1e-14);
        let mut p = AgmParams::zeros(1);
        p.set_bias(0, 0.8);
        let lp = p.log_prob(&cfg(&[1])).unwrap();
        assert!((lp + (1.0 + (-1.6f64).exp()).ln()).abs() < 1e-15);
    }

    #[test]
    fn normalization_small() {
        let p = init_params(8, 0.7, 1).unwrap();
        let total: f64 = all_configs(8).map(|s| p.log_prob(&s).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grad_at_zero() {
        let p = AgmParams::zeros(4);
        let s = cfg(&[1, -1, -1, 1]);
        let g = p.grad_log_prob(&s).unwrap();
        for i in 0..4 {
            assert_eq!(g.bias(i), s.get(i) as f64);
            for j in i + 1..4 {
                assert_eq!(g.pair(i, j), (s.get(i) * s.get(j)) as f64);
            }
        }
    }

    #[test]
    fn grad_saturated() {
        let mut p = AgmParams::zeros(2);
        p.set_bias(0, 20.0);
        let g = p.grad_log_prob(&cfg(&[1, 1])).unwrap();
        assert!(g.bias(0).abs() < 1e-12);
    }

    #[test]
    fn delta_zero_params() {
        let p = AgmParams::zeros(6);
        let s = cfg(&[1, 1, -1, 1, -1, 1]);
        let c = p.cache(&s);
        for k in 0..6 {
            assert_eq!(p.log_prob_delta(&c, &[k]), 0.0);
        }
    }

    #[test]
    fn saturated_sampler() {
        let mut p = AgmParams::zeros(5);
        for i in 0..5 {
            p.set_bias(i, 10.0);
        }
        for s in p.sample_batch(500, 4) {
            assert_eq!(s, SpinConfig::all_up(5));
        }
        assert_eq!(p.sample_batch(50, 8), p.sample_batch(50, 8));
    }

    #[test]
    fn custom_order() {
        let p = init_params(4, 0.5, 2).unwrap().with_order(vec![2, 0, 3, 1]).unwrap();
        let total: f64 = all_configs(4).map(|s| p.log_prob(&s).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let s = cfg(&[1, -1, -1, 1]);
        assert_eq!(p.scatter(&p.gather(s.spins())), s);
        let c = p.cache(&s);
        let d = p.log_prob_delta(&c, &[3]);
        let full = p.log_prob(&s.flipped(&[3])).unwrap() - p.log_prob(&s).unwrap();
        assert!((d - full).abs() < 1e-12);
        assert!(AgmParams::zeros(3).with_order(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn from_flat_validates() {
        assert!(AgmParams::from_flat(3, vec![0.0; 5]).is_err());
        assert!(AgmParams::from_flat(2, vec![0.0, f64::INFINITY, 0.0]).is_err());
        assert!(AgmParams::from_flat(2, vec![0.1, 0.2, 0.3]).is_ok());
    }
}
