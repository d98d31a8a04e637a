use super::{ensure_dense, SparseRows};
use crate::ansatz::{sym_log_prob, AgmParams, SymmetryGroup};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::spin::SpinConfig;

/// `ln P(s)` for every basis index, optionally group-averaged.
pub fn log_prob_table(p: &AgmParams, group: Option<&SymmetryGroup>) -> Result<Vec<f64>> {
    let n = p.n();
    ensure_dense(n)?;
    (0..1usize << n)
        .map(|idx| {
            let s = SpinConfig::from_index(idx, n);
            match group {
                Some(g) => sym_log_prob(p, g, &s),
                None => p.log_prob(&s),
            }
        })
        .collect()
}

/// `E(θ) = Σ_{s,s'} sqrt(P(s) P(s')) H[s, s']` by exhaustive summation.
pub fn variational_energy_exact(h: &HamiltonianSpec, p: &AgmParams, group: Option<&SymmetryGroup>) -> Result<f64> {
    if h.n_sites() != p.n() {
        return Err(Error::Shape { expected: h.n_sites(), got: p.n() });
    }
    let rows = SparseRows::build(h)?;
    let lp = log_prob_table(p, group)?;
    let mut e = 0.0;
    for (i, &lpi) in lp.iter().enumerate() {
        e += lpi.exp() * rows.diag[i];
        for (j, v) in rows.row(i) {
            e += v * (0.5 * (lpi + lp[j])).exp();
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_chain;

    #[test]
    fn zero_params() {
        let h = HamiltonianSpec::tim(build_chain(1).unwrap(), 0.6).unwrap();
        let e = variational_energy_exact(&h, &AgmParams::zeros(1), None).unwrap();
        assert!((e + 0.6).abs() < 1e-15);
        let h = HamiltonianSpec::tim(build_chain(3).unwrap(), 1.0).unwrap();
        let e = variational_energy_exact(&h, &AgmParams::zeros(3), None).unwrap();
        assert!((e + 3.0).abs() < 1e-14);
    }

    #[test]
    fn shape_guard() {
        let h = HamiltonianSpec::tim(build_chain(3).unwrap(), 1.0).unwrap();
        assert!(variational_energy_exact(&h, &AgmParams::zeros(2), None).is_err());
    }
}
