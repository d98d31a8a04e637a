//! Ground states by power iteration on the shifted operator `cI - H`.
//!
//! For a stoquastic `H` the shifted operator is entrywise nonnegative when
//! `c >= max_s H[s,s]`; choosing `c = max diagonal + max off-diagonal row mass`
//! also bounds every eigenvalue of `H` from above, so the iteration converges
//! to the Perron vector, which is the ground state.

use super::ensure_dense;
use crate::error::{Error, Result};
use crate::hamiltonian::{check_stoquastic, HamiltonianSpec};
use crate::spin::SpinConfig;

/// Sparse rows of `H` in the dense basis.
#[derive(Debug, Clone)]
pub struct SparseRows {
    pub n: usize,
    pub diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseRows {
    pub fn build(h: &HamiltonianSpec) -> Result<Self> {
        let n = h.n_sites();
        ensure_dense(n)?;
        let dim = 1usize << n;
        let mut diag = Vec::with_capacity(dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for idx in 0..dim {
            let s = SpinConfig::from_index(idx, n);
            diag.push(h.diagonal_raw(s.spins()));
            h.for_each_connection(s.spins(), |c| {
                let mut j = idx;
                for &site in c.flip.sites() {
                    j ^= 1 << site;
                }
                cols.push(j as u32);
                vals.push(c.element);
            });
            row_ptr.push(cols.len());
        }
        Ok(SparseRows { n, diag, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Off-diagonal entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.vals[r].iter().copied())
    }

    /// `out = H v`.
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[i] * v[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * v[self.cols[k] as usize];
            }
            *o = acc;
        }
    }

    /// `max_s H[s,s] + max_s Σ_{s'≠s} |H[s,s']|`.
    pub fn perron_shift(&self) -> f64 {
        let dmax = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let l1 = (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        dmax + l1
    }

    /// Dense copy of the matrix, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut m = vec![vec![0.0; dim]; dim];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = self.diag[i];
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        m
    }
}

/// Ground state amplitudes (nonnegative, unit norm) and energy.
#[derive(Debug, Clone)]
pub struct DenseState {
    pub n: usize,
    pub amplitudes: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    /// Stop once `‖Hψ - Eψ‖ < tol`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions { tol: 1e-12, max_iterations: 5_000_000 }
    }
}

pub fn ground_state_dense(h: &HamiltonianSpec, tol: f64) -> Result<DenseState> {
    ground_state_dense_with(h, PowerOptions { tol, ..PowerOptions::default() })
}

pub fn ground_state_dense_with(h: &HamiltonianSpec, opts: PowerOptions) -> Result<DenseState> {
    check_stoquastic(h)?;
    let rows = SparseRows::build(h)?;
    let dim = rows.dim();
    let c = rows.perron_shift();
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut hv = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iterations {
        rows.matvec(&v, &mut hv);
        let energy: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
        residual = v
            .iter()
            .zip(&hv)
            .map(|(a, b)| (b - energy * a).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual < opts.tol {
            return Ok(DenseState { n: rows.n, amplitudes: v, energy, residual, iterations: it });
        }
        let mut norm = 0.0;
        for (a, b) in v.iter_mut().zip(&hv) {
            *a = c * *a - b;
            norm += *a * *a;
        }
        let inv = 1.0 / norm.sqrt();
        v.iter_mut().for_each(|a| *a *= inv);
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual })
}
