//! The four stoquastic Hamiltonian families and their sparse row access.
//!
//! Conventions, with `Z`, `X`, `Y` Pauli operators and bonds counted once:
//!
//! * TIM:   `H = -Σ_<ij> Z_i Z_j - g Σ_i X_i`
//! * XXZ:   `H =  Σ_<ij> Z_i Z_j - g Σ_<ij> (X_i X_j + Y_i Y_j)`
//! * DTIM:  `H =  Σ_<ij> J_ij Z_i Z_j - g Σ_i X_i`, `J_ij = ±1`
//! * ANNNI: `H = -Σ_vert Z Z - (1-α) Σ_horiz Z Z + α Σ_nnn Z Z - g Σ_i X_i`
//!
//! Every family also accepts an optional uniform longitudinal field
//! `-h Σ_i Z_i`, used to split degenerate ground states.

use crate::error::{Error, Result};
use crate::lattice::{BondAxis, LatticeGraph};
use crate::rng::{self, tag};
use crate::spin::SpinConfig;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Tim,
    Xxz,
    Dtim,
    Annni,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Variant::Tim => "TIM",
            Variant::Xxz => "XXZ",
            Variant::Dtim => "DTIM",
            Variant::Annni => "ANNNI",
        };
        f.write_str(s)
    }
}

/// Sites flipped by one off-diagonal matrix element (one or two sites).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flip {
    sites: [usize; 2],
    len: u8,
}

impl Flip {
    pub fn one(a: usize) -> Self {
        Flip { sites: [a, a], len: 1 }
    }

    pub fn two(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b);
        Flip { sites: [a, b], len: 2 }
    }

    #[inline]
    pub fn sites(&self) -> &[usize] {
        &self.sites[..self.len as usize]
    }
}

/// One off-diagonal entry `H[s, s']` of a row, with `s'` described by its flips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub flip: Flip,
    pub element: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub variant: Variant,
    pub graph: LatticeGraph,
    /// Transverse-field or exchange strength.
    pub g: f64,
    /// ANNNI competition parameter; zero for the other families.
    pub alpha: f64,
    /// Per nearest-neighbour bond couplings (DTIM only, empty otherwise).
    pub couplings: Vec<f64>,
    /// Longitudinal field `h` of the `-h Σ Z` term.
    pub z_field: f64,
}

impl HamiltonianSpec {
    pub fn tim(graph: LatticeGraph, g: f64) -> Result<Self> {
        Self::build(Variant::Tim, graph, g, 0.0, Vec::new())
    }

    pub fn xxz(graph: LatticeGraph, g: f64) -> Result<Self> {
        Self::build(Variant::Xxz, graph, g, 0.0, Vec::new())
    }

    pub fn dtim(graph: LatticeGraph, g: f64, couplings: Vec<f64>) -> Result<Self> {
        Self::build(Variant::Dtim, graph, g, 0.0, couplings)
    }

    pub fn annni(graph: LatticeGraph, g: f64, alpha: f64) -> Result<Self> {
        Self::build(Variant::Annni, graph, g, alpha, Vec::new())
    }

    /// Adds the `-h Σ Z` term.
    pub fn with_z_field(mut self, h: f64) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::InvalidInput("z field must be finite".into()));
        }
        self.z_field = h;
        Ok(self)
    }

    fn build(
        variant: Variant,
        graph: LatticeGraph,
        g: f64,
        alpha: f64,
        couplings: Vec<f64>,
    ) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::InvalidInput("g must be finite".into()));
        }
        match variant {
            Variant::Dtim => {
                if couplings.len() != graph.nn_bonds.len() {
                    return Err(Error::Shape { expected: graph.nn_bonds.len(), got: couplings.len() });
                }
                if let Some(j) = couplings.iter().find(|&&j| j != 1.0 && j != -1.0) {
                    return Err(Error::InvalidInput(format!("DTIM coupling {j} is not ±1")));
                }
            }
            Variant::Annni if !(0.0..=1.0).contains(&alpha) => {
                return Err(Error::InvalidInput(format!("ANNNI alpha {alpha} outside [0, 1]")));
            }
            _ => {}
        }
        Ok(HamiltonianSpec { variant, graph, g, alpha, couplings, z_field: 0.0 })
    }

    pub fn n_sites(&self) -> usize {
        self.graph.n_sites()
    }

    /// `<s|H|s>`.
    pub fn diagonal_energy(&self, s: &SpinConfig) -> Result<f64> {
        s.ensure_len(self.n_sites())?;
        Ok(self.diagonal_raw(s.spins()))
    }

    /// `<s|H|s>` without the length check.
    pub fn diagonal_raw(&self, s: &[i8]) -> f64 {
        let zz = |&(i, j): &(usize, usize)| (s[i] * s[j]) as f64;
        let bonds = &self.graph.nn_bonds;
        let mut e = match self.variant {
            Variant::Tim => -bonds.iter().map(zz).sum::<f64>(),
            Variant::Xxz => bonds.iter().map(zz).sum::<f64>(),
            Variant::Dtim => bonds.iter().zip(&self.couplings).map(|(b, j)| j * zz(b)).sum(),
            Variant::Annni => {
                let mut e = 0.0;
                for (b, axis) in bonds.iter().zip(&self.graph.nn_axes) {
                    e -= match axis {
                        BondAxis::Vertical => zz(b),
                        BondAxis::Horizontal => (1.0 - self.alpha) * zz(b),
                    };
                }
                e + self.alpha * self.graph.axis_nnn_bonds.iter().map(zz).sum::<f64>()
            }
        };
        if self.z_field != 0.0 {
            e -= self.z_field * s.iter().map(|&v| v as f64).sum::<f64>();
        }
        e
    }

    /// Visits every nonzero off-diagonal entry of row `s`.
    #[inline]
    pub fn for_each_connection(&self, s: &[i8], mut f: impl FnMut(Connection)) {
        match self.variant {
            Variant::Xxz => {
                let element = -2.0 * self.g;
                if element == 0.0 {
                    return;
                }
                for &(i, j) in &self.graph.nn_bonds {
                    if s[i] != s[j] {
                        f(Connection { flip: Flip::two(i, j), element });
                    }
                }
            }
            _ => {
                let element = -self.g;
                if element == 0.0 {
                    return;
                }
                for i in 0..s.len() {
                    f(Connection { flip: Flip::one(i), element });
                }
            }
        }
    }

    /// Off-diagonal entries of row `s` as flip descriptors.
    pub fn connections(&self, s: &SpinConfig) -> Result<Vec<Connection>> {
        s.ensure_len(self.n_sites())?;
        let mut out = Vec::new();
        self.for_each_connection(s.spins(), |c| out.push(c));
        Ok(out)
    }

    /// Off-diagonal entries of row `s` as full configurations.
    pub fn connected_configs(&self, s: &SpinConfig) -> Result<Vec<(SpinConfig, f64)>> {
        Ok(self
            .connections(s)?
            .into_iter()
            .map(|c| (s.flipped(c.flip.sites()), c.element))
            .collect())
    }

    /// Largest off-diagonal row mass `Σ_{s'} |H[s, s']|` over all rows.
    pub fn max_offdiag_l1(&self) -> f64 {
        match self.variant {
            // at most one exchange per bond
            Variant::Xxz => 2.0 * self.g.abs() * self.graph.nn_bonds.len() as f64,
            _ => self.g.abs() * self.n_sites() as f64,
        }
    }

    /// Upper bound on `max_s <s|H|s>` from the term magnitudes.
    pub fn diagonal_bound(&self) -> f64 {
        let nn = self.graph.nn_bonds.len() as f64;
        let z = self.z_field.abs() * self.n_sites() as f64;
        let zz = match self.variant {
            Variant::Annni => {
                let mut e = 0.0;
                for axis in &self.graph.nn_axes {
                    e += match axis {
                        BondAxis::Vertical => 1.0,
                        BondAxis::Horizontal => 1.0 - self.alpha,
                    };
                }
                e + self.alpha * self.graph.axis_nnn_bonds.len() as f64
            }
            _ => nn,
        };
        zz + z
    }
}

/// Reports whether every off-diagonal element of `h` is non-positive.
pub fn check_stoquastic(h: &HamiltonianSpec) -> Result<()> {
    if h.g < 0.0 {
        let what = match h.variant {
            Variant::Xxz => "exchange strength g",
            _ => "transverse field g",
        };
        return Err(Error::NotStoquastic(format!(
            "{what} = {} < 0 makes {} off-diagonal elements positive",
            h.g, h.variant
        )));
    }
    Ok(())
}

/// I.i.d. uniform `±1` couplings, one per nearest-neighbour bond.
pub fn sample_disorder(graph: &LatticeGraph, seed: u64) -> Vec<f64> {
    let mut rng = rng::substream(seed, &[tag::DISORDER]);
    (0..graph.nn_bonds.len())
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, build_square};

    fn cfg(v: &[i8]) -> SpinConfig {
        SpinConfig::new(v.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_examples() {
        let tim = HamiltonianSpec::tim(build_chain(3).unwrap(), 1.0).unwrap();
        assert_eq!(tim.diagonal_energy(&cfg(&[1, 1, 1])).unwrap(), -2.0);
        let xxz = HamiltonianSpec::xxz(build_square(2, 2, false).unwrap(), 1.0).unwrap();
        assert_eq!(xxz.diagonal_energy(&cfg(&[1, -1, -1, 1])).unwrap(), -4.0);
        let annni = HamiltonianSpec::annni(build_square(1, 4, true).unwrap(), 1.0, 1.0 / 3.0).unwrap();
        let e = annni.diagonal_energy(&cfg(&[1, 1, -1, -1])).unwrap();
        assert!((e + 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shape_errors() {
        let tim = HamiltonianSpec::tim(build_chain(3).unwrap(), 1.0).unwrap();
        assert!(matches!(tim.diagonal_energy(&cfg(&[1, 1])), Err(Error::Shape { .. })));
        assert!(tim.connected_configs(&cfg(&[1])).is_err());
    }

    #[test]
    fn connection_examples() {
        let tim = HamiltonianSpec::tim(build_chain(2).unwrap(), 1.0).unwrap();
        assert_eq!(
            tim.connected_configs(&cfg(&[1, 1])).unwrap(),
            vec![(cfg(&[-1, 1]), -1.0), (cfg(&[1, -1]), -1.0)]
        );
        let xxz = HamiltonianSpec::xxz(build_chain(2).unwrap(), 1.0).unwrap();
        assert_eq!(xxz.connected_configs(&cfg(&[1, -1])).unwrap(), vec![(cfg(&[-1, 1]), -2.0)]);
        assert!(xxz.connected_configs(&cfg(&[1, 1])).unwrap().is_empty());
    }

    #[test]
    fn stoquastic_checks() {
        let tim = HamiltonianSpec::tim(build_chain(4).unwrap(), 1.0).unwrap();
        assert!(check_stoquastic(&tim).is_ok());
        let xxz = HamiltonianSpec::xxz(build_chain(4).unwrap(), -0.5).unwrap();
        let err = check_stoquastic(&xxz).unwrap_err();
        assert!(err.to_string().contains("exchange strength g"));
        let graph = build_square(3, 3, false).unwrap();
        let j = sample_disorder(&graph, 11);
        let dtim = HamiltonianSpec::dtim(graph, 0.2, j).unwrap();
        assert!(check_stoquastic(&dtim).is_ok());
    }

    #[test]
    fn parameter_validation() {
        let g = build_square(2, 2, false).unwrap();
        assert!(HamiltonianSpec::dtim(g.clone(), 1.0, vec![1.0, 0.5, 1.0, 1.0]).is_err());
        assert!(HamiltonianSpec::dtim(g.clone(), 1.0, vec![1.0; 3]).is_err());
        assert!(HamiltonianSpec::annni(g.clone(), 1.0, 1.5).is_err());
        assert!(HamiltonianSpec::tim(g, f64::NAN).is_err());
    }

    #[test]
    fn disorder_determinism_and_balance() {
        let g = build_square(2, 2, false).unwrap();
        assert_eq!(sample_disorder(&g, 5).len(), 4);
        assert_eq!(sample_disorder(&g, 5), sample_disorder(&g, 5));
        // 224 x 224 lattice has 2*224*223 = 99_904 bonds; use a chain for exactly 1e5.
        let chain = build_chain(100_001).unwrap();
        let j = sample_disorder(&chain, 2024);
        assert_eq!(j.len(), 100_000);
        let mean = j.iter().sum::<f64>() / j.len() as f64;
        assert!(mean.abs() < 4.0 / (1e5f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn annni_at_zero_alpha_is_tim() {
        let g = build_square(3, 3, true).unwrap();
        let annni = HamiltonianSpec::annni(g.clone(), 1.0, 0.0).unwrap();
        let tim = HamiltonianSpec::tim(g, 1.0).unwrap();
        for s in crate::spin::all_configs(9) {
            assert_eq!(annni.diagonal_energy(&s).unwrap(), tim.diagonal_energy(&s).unwrap());
        }
    }
}
