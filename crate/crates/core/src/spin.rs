//! Computational-basis spin configurations.
//!
//! Sites are 0-based in code. The dense basis index of a configuration sets
//! bit `b` when site `b` holds spin -1; every exhaustive routine in the crate
//! shares this convention.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A configuration of `n` Ising spins, each exactly `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(format!("spin value {bad} is not +1 or -1")));
        }
        Ok(SpinConfig(spins))
    }

    /// All spins up.
    pub fn all_up(n: usize) -> Self {
        SpinConfig(vec![1; n])
    }

    /// Decodes a dense basis index (bit `b` set means site `b` is down).
    pub fn from_index(index: usize, n: usize) -> Self {
        SpinConfig((0..n).map(|b| if (index >> b) & 1 == 1 { -1 } else { 1 }).collect())
    }

    /// Dense basis index of this configuration.
    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &s)| if s < 0 { acc | (1 << b) } else { acc })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn get(&self, site: usize) -> i8 {
        self.0[site]
    }

    pub fn flip(&mut self, site: usize) {
        self.0[site] = -self.0[site];
    }

    /// Copy with the given sites flipped.
    pub fn flipped(&self, sites: &[usize]) -> Self {
        let mut out = self.clone();
        for &s in sites {
            out.flip(s);
        }
        out
    }

    /// Every spin reversed.
    pub fn global_flip(&self) -> Self {
        SpinConfig(self.0.iter().map(|s| -s).collect())
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| s as f64).collect()
    }

    /// Compact `+`/`-` rendering, site 0 first.
    pub fn to_pm_string(&self) -> String {
        self.0.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }

    pub(crate) fn from_raw(spins: Vec<i8>) -> Self {
        debug_assert!(spins.iter().all(|&s| s == 1 || s == -1));
        SpinConfig(spins)
    }

    pub(crate) fn ensure_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::Shape { expected: n, got: self.len() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        SpinConfig::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Self {
        s.0
    }
}

/// Iterator over all `2^n` configurations in basis-index order.
pub fn all_configs(n: usize) -> impl Iterator<Item = SpinConfig> {
    (0..1usize << n).map(move |idx| SpinConfig::from_index(idx, n))
}
