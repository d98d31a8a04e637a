//! Open-boundary lattices.
//!
//! Square lattices are indexed row-major: site `(x, y)` with `0 <= x < lx`
//! (row) and `0 <= y < ly` (position inside the row) has index `x * ly + y`.
//! The axial next-nearest-neighbour bonds run along `y` only.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Chain,
    Square,
}

/// Kind of a nearest-neighbour bond on a square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondAxis {
    /// Along `y`, inside a row.
    Horizontal,
    /// Along `x`, between rows.
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    pub geometry: Geometry,
    pub lx: usize,
    pub ly: usize,
    /// Nearest-neighbour bonds `(i, j)` with `i < j`, each listed once.
    pub nn_bonds: Vec<(usize, usize)>,
    /// Axis of each entry in `nn_bonds`.
    pub nn_axes: Vec<BondAxis>,
    /// `(x, y)`-`(x, y + 2)` bonds, only when requested.
    pub axis_nnn_bonds: Vec<(usize, usize)>,
}

impl LatticeGraph {
    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    /// Coordinates `(x, y)` of a site.
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.ly, site % self.ly)
    }
}

/// Open chain of `n` sites; its bonds are treated as horizontal.
pub fn build_chain(n: usize) -> Result<LatticeGraph> {
    if n == 0 {
        return Err(Error::InvalidSize("a chain needs at least one site".into()));
    }
    let nn_bonds: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Ok(LatticeGraph {
        geometry: Geometry::Chain,
        lx: 1,
        ly: n,
        nn_axes: vec![BondAxis::Horizontal; nn_bonds.len()],
        nn_bonds,
        axis_nnn_bonds: Vec::new(),
    })
}

/// Open `lx x ly` square lattice.
pub fn build_square(lx: usize, ly: usize, with_nnn: bool) -> Result<LatticeGraph> {
    if lx == 0 || ly == 0 {
        return Err(Error::InvalidSize(format!("square lattice {lx}x{ly} has a zero dimension")));
    }
    let idx = |x: usize, y: usize| x * ly + y;
    let mut nn_bonds = Vec::new();
    let mut nn_axes = Vec::new();
    let mut axis_nnn_bonds = Vec::new();
    for x in 0..lx {
        for y in 0..ly {
            if y + 1 < ly {
                nn_bonds.push((idx(x, y), idx(x, y + 1)));
                nn_axes.push(BondAxis::Horizontal);
            }
            if x + 1 < lx {
                nn_bonds.push((idx(x, y), idx(x + 1, y)));
                nn_axes.push(BondAxis::Vertical);
            }
            if with_nnn && y + 2 < ly {
                axis_nnn_bonds.push((idx(x, y), idx(x, y + 2)));
            }
        }
    }
    Ok(LatticeGraph { geometry: Geometry::Square, lx, ly, nn_bonds, nn_axes, axis_nnn_bonds })
}
