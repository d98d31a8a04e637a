//! Symmetry-averaged AGM distributions.
//!
//! For a group `G` of site permutations combined with optional global spin
//! flips, the averaged model is `P_G(s) = (1/|G|) Σ_g P(g·s)`. Averaging
//! happens on probabilities, so exact sampling carries over: draw `s` from
//! the base model and apply a uniformly chosen group element.

use super::{AgmGradient, AgmParams};
use crate::error::{Error, Result};
use crate::math::logsumexp;
use crate::rng::{self, tag};
use crate::spin::SpinConfig;
use rand::Rng;
use std::collections::HashSet;

/// `(g·s)_i = ±s[perm[i]]`, with the minus sign when `flip` is set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub perm: Vec<usize>,
    pub flip: bool,
    inverse: Vec<usize>,
}

impl GroupElement {
    pub fn new(perm: Vec<usize>, flip: bool) -> Result<Self> {
        let n = perm.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::InvalidInput("group element is not a permutation".into()));
            }
            inverse[p] = i;
        }
        Ok(GroupElement { perm, flip, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect(), false).expect("identity")
    }

    pub fn global_flip(n: usize) -> Self {
        Self::new((0..n).collect(), true).expect("identity perm")
    }

    /// Site `i` exchanged with site `n - 1 - i`.
    pub fn chain_reflection(n: usize) -> Self {
        Self::new((0..n).rev().collect(), false).expect("reversal")
    }

    /// Reflection `y -> ly - 1 - y` inside every row of an `lx x ly` lattice.
    pub fn reflect_y(lx: usize, ly: usize) -> Self {
        let perm = (0..lx * ly).map(|s| (s / ly) * ly + (ly - 1 - s % ly)).collect();
        Self::new(perm, false).expect("reflection")
    }

    /// Reflection `x -> lx - 1 - x` of the rows of an `lx x ly` lattice.
    pub fn reflect_x(lx: usize, ly: usize) -> Self {
        let perm = (0..lx * ly).map(|s| (lx - 1 - s / ly) * ly + s % ly).collect();
        Self::new(perm, false).expect("reflection")
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        Self::new(perm, self.flip ^ other.flip).expect("composition of permutations")
    }

    pub fn apply_raw(&self, s: &[i8], out: &mut [i8]) {
        let sign = if self.flip { -1 } else { 1 };
        for (o, &p) in out.iter_mut().zip(&self.perm) {
            *o = sign * s[p];
        }
    }

    pub fn apply(&self, s: &SpinConfig) -> SpinConfig {
        let mut out = vec![0i8; s.len()];
        self.apply_raw(s.spins(), &mut out);
        SpinConfig::from_raw(out)
    }

    /// Sites of `g·s` that change when `sites` of `s` are flipped.
    pub fn map_flips(&self, sites: &[usize], out: &mut Vec<usize>) {
        out.clear();
        out.extend(sites.iter().map(|&q| self.inverse[q]));
    }
}

/// A finite group of spin-configuration transforms, identity first.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGroup {
    n: usize,
    elements: Vec<GroupElement>,
}

impl SymmetryGroup {
    pub fn trivial(n: usize) -> Self {
        SymmetryGroup { n, elements: vec![GroupElement::identity(n)] }
    }

    /// Closure of the generators under composition.
    pub fn generate(n: usize, generators: Vec<GroupElement>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.len() != n) {
            return Err(Error::Shape { expected: n, got: g.len() });
        }
        let mut elements = vec![GroupElement::identity(n)];
        let mut seen: HashSet<GroupElement> = elements.iter().cloned().collect();
        let mut frontier = 0;
        while frontier < elements.len() {
            let current = elements[frontier].clone();
            for gen in &generators {
                let next = gen.compose(&current);
                if seen.insert(next.clone()) {
                    elements.push(next);
                }
            }
            frontier += 1;
        }
        Ok(SymmetryGroup { n, elements })
    }

    /// `{id, global flip}`.
    pub fn spin_flip(n: usize) -> Self {
        Self::generate(n, vec![GroupElement::global_flip(n)]).expect("valid generator")
    }

    /// `{id, flip, reflect, flip∘reflect}` for an open chain.
    pub fn chain(n: usize) -> Self {
        Self::generate(n, vec![GroupElement::global_flip(n), GroupElement::chain_reflection(n)])
            .expect("valid generators")
    }

    /// Global flip plus both axis reflections of an open `lx x ly` lattice.
    pub fn square(lx: usize, ly: usize) -> Self {
        let n = lx * ly;
        Self::generate(
            n,
            vec![GroupElement::global_flip(n), GroupElement::reflect_x(lx, ly), GroupElement::reflect_y(lx, ly)],
        )
        .expect("valid generators")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

/// Sorted `ln P(g·s)` over the group; sorting makes the later sum independent
/// of which representative of an orbit was passed in.
fn orbit_log_probs(p: &AgmParams, group: &SymmetryGroup, s: &SpinConfig) -> Vec<f64> {
    let mut buf = vec![0i8; s.len()];
    let mut lps: Vec<f64> = group
        .elements
        .iter()
        .map(|g| {
            g.apply_raw(s.spins(), &mut buf);
            p.log_prob_raw(&buf)
        })
        .collect();
    lps.sort_by(f64::total_cmp);
    lps
}

/// `ln((1/|G|) Σ_g P(g·s))`.
pub fn sym_log_prob(p: &AgmParams, group: &SymmetryGroup, s: &SpinConfig) -> Result<f64> {
    s.ensure_len(p.n())?;
    if group.n() != p.n() {
        return Err(Error::Shape { expected: p.n(), got: group.n() });
    }
    let lps = orbit_log_probs(p, group, s);
    Ok(logsumexp(&lps) - (group.len() as f64).ln())
}

/// `∇_θ ln P_G(s) = Σ_g w_g ∇_θ ln P(g·s)` with `w_g ∝ P(g·s)`.
pub fn sym_grad_log_prob(p: &AgmParams, group: &SymmetryGroup, s: &SpinConfig) -> Result<AgmGradient> {
    s.ensure_len(p.n())?;
    let images: Vec<SpinConfig> = group.elements.iter().map(|g| g.apply(s)).collect();
    let lps: Vec<f64> = images.iter().map(|t| p.log_prob_raw(t.spins())).collect();
    let norm = logsumexp(&lps);
    let mut grad = p.zeros_like();
    for (t, lp) in images.iter().zip(&lps) {
        let c = p.cache(t);
        p.accumulate_score(&c.x, &c.fields, (lp - norm).exp(), grad.as_mut_slice());
    }
    Ok(grad)
}

/// `count` exact samples from the group-averaged distribution.
pub fn sym_sample(p: &AgmParams, group: &SymmetryGroup, count: usize, seed: u64) -> Vec<SpinConfig> {
    (0..count as u64)
        .map(|k| {
            let base = p.scatter(&p.sample_keyed(seed, 0, k).x);
            let mut rng = rng::substream(seed, &[tag::SYMMETRY, k]);
            let g = &group.elements[rng.gen_range(0..group.len())];
            g.apply(&base)
        })
        .collect()
}
