//! Multiplicative probability ratios for the local-energy inner loop.
//!
//! For a sample with conditional fields `f_i`, keep `a_i = exp(-2 s_i f_i)`.
//! Flipping site `k` multiplies `a_i` (for `i < k`) by `exp(4 s_i s_k pair(i,k))`,
//! which is precomputed once per parameter update, so a ratio
//! `P(s') / P(s)` costs only multiplications. Entries that would overflow fall
//! back to the log-domain path.

use super::{AgmParams, FieldCache};

/// Ratios are capped at `exp(2 * MAX_HALF_LOG_RATIO)`; the square root entering
/// the local energy is then at most `exp(MAX_HALF_LOG_RATIO)`.
pub const MAX_HALF_LOG_RATIO: f64 = 30.0;

/// `exp(±4 pair(i, k))`, stored by column: entries `i < k` of column `k`
/// are contiguous.
#[derive(Debug, Clone)]
pub struct RatioTables {
    up: Vec<f64>,
    down: Vec<f64>,
}

#[inline]
fn col_offset(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

impl RatioTables {
    pub fn new(p: &AgmParams) -> Self {
        let n = p.n();
        let mut up = Vec::with_capacity(col_offset(n));
        for k in 0..n {
            up.extend((0..k).map(|i| (4.0 * p.pair(i, k)).exp()));
        }
        let down = up.iter().map(|e| 1.0 / e).collect();
        RatioTables { up, down }
    }

    #[inline]
    fn column(&self, k: usize) -> (&[f64], &[f64]) {
        let r = col_offset(k)..col_offset(k + 1);
        (&self.up[r.clone()], &self.down[r])
    }
}

/// A sample in conditioning order with its cached conditional terms.
#[derive(Debug, Clone)]
pub struct SampleState {
    pub cache: FieldCache,
    a: Vec<f64>,
    /// `prefix[k] = Π_{i<k} (1 + a_i)`.
    prefix: Vec<f64>,
    overflow: bool,
}

impl SampleState {
    pub fn new(cache: FieldCache) -> Self {
        let a: Vec<f64> = cache
            .x
            .iter()
            .zip(&cache.fields)
            .map(|(s, f)| (-2.0 * s * f).exp())
            .collect();
        let mut prefix = Vec::with_capacity(a.len() + 1);
        let mut acc = 1.0;
        prefix.push(acc);
        for v in &a {
            acc *= 1.0 + v;
            prefix.push(acc);
        }
        let overflow = !acc.is_finite() || a.iter().any(|v| !v.is_finite() || *v == 0.0);
        SampleState { cache, a, prefix, overflow }
    }

    /// `P(s') / P(s)` for `s'` = this sample with the given positions flipped.
    /// Returns the ratio and whether the cap was applied.
    pub fn ratio(&self, p: &AgmParams, tables: &RatioTables, positions: &mut [usize]) -> (f64, bool) {
        positions.sort_unstable();
        let cap = (2.0 * MAX_HALF_LOG_RATIO).exp();
        if !self.overflow {
            let r = match &*positions {
                [k] => self.ratio_single(tables, *k),
                ks => self.ratio_mul(tables, ks),
            };
            if r.is_finite() && r > 0.0 {
                return if r > cap { (cap, true) } else { (r, false) };
            }
        }
        let sites: Vec<usize> = positions.iter().map(|&q| p.order()[q]).collect();
        let d = p.log_prob_delta(&self.cache, &sites);
        if d > 2.0 * MAX_HALF_LOG_RATIO {
            (cap, true)
        } else {
            (d.exp(), false)
        }
    }

    // Conditionals above `k` are untouched, conditional `k` contributes `a_k`
    // and each `i < k` contributes `(1 + a_i) / (1 + a_i m_i)`.
    fn ratio_single(&self, tables: &RatioTables, k: usize) -> f64 {
        let (up, down) = tables.column(k);
        let x = &self.cache.x[..k];
        let a = &self.a[..k];
        let xk = self.cache.x[k];
        let mut den = [1.0f64; 4];
        let (xc, ac, uc, dc) = (x.chunks_exact(4), a.chunks_exact(4), up.chunks_exact(4), down.chunks_exact(4));
        let tail = (xc.remainder(), ac.remainder(), uc.remainder(), dc.remainder());
        for (((xs, as_), us), ds) in xc.zip(ac).zip(uc).zip(dc) {
            for l in 0..4 {
                let m = if xs[l] == xk { us[l] } else { ds[l] };
                den[l] *= 1.0 + as_[l] * m;
            }
        }
        for (((xi, ai), u), d) in tail.0.iter().zip(tail.1).zip(tail.2).zip(tail.3) {
            let m = if *xi == xk { *u } else { *d };
            den[0] *= 1.0 + ai * m;
        }
        self.a[k] * self.prefix[k] / ((den[0] * den[1]) * (den[2] * den[3]))
    }

    fn ratio_mul(&self, tables: &RatioTables, ks: &[usize]) -> f64 {
        let x = &self.cache.x;
        let last = *ks.last().expect("flips must be nonempty");
        let cols: Vec<(&[f64], &[f64])> = ks.iter().map(|&k| tables.column(k)).collect();
        let mut r = 1.0;
        let mut next = 0;
        for i in 0..=last {
            let flipped = ks[next] == i;
            if flipped {
                next += 1;
            }
            let mut m = 1.0;
            for (&k, (up, down)) in ks[next..].iter().zip(&cols[next..]) {
                m *= if x[i] == x[k] { up[i] } else { down[i] };
            }
            let a = self.a[i];
            r *= if flipped { (1.0 + a) / (1.0 + 1.0 / (a * m)) } else { (1.0 + a) / (1.0 + a * m) };
        }
        r
    }
}
