//! Parameter checkpoints.
//!
//! A checkpoint is a single JSON document:
//!
//! ```text
//! {
//!   "format": "agm-checkpoint",
//!   "version": 1,
//!   "n": <sites>,
//!   "order": [<site at position 0>, ...],
//!   "bias": [<n numbers>],
//!   "pair": [<n(n-1)/2 numbers, row-major upper triangle: (0,1) (0,2) .. (1,2) ..>],
//!   "provenance": { "init_seed": <u64|null>, "train_seed": <u64|null>, "step": <u64|null> }
//! }
//! ```
//!
//! Numbers are written in shortest round-trip form, so a save/load cycle is
//! bit-exact.

use crate::ansatz::AgmParams;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_TAG: &str = "agm-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub init_seed: Option<u64>,
    pub train_seed: Option<u64>,
    pub step: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub order: Vec<usize>,
    pub bias: Vec<f64>,
    pub pair: Vec<f64>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl Checkpoint {
    pub fn from_params(p: &AgmParams, provenance: Provenance) -> Self {
        Checkpoint {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            n: p.n(),
            order: p.order().to_vec(),
            bias: p.bias_slice().to_vec(),
            pair: p.pair_slice().to_vec(),
            provenance,
        }
    }

    pub fn to_params(&self) -> Result<AgmParams> {
        if self.format != FORMAT_TAG {
            return Err(Error::Format(format!("unexpected format tag {:?}", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        if self.bias.len() != self.n {
            return Err(Error::Format(format!("bias has {} entries for n = {}", self.bias.len(), self.n)));
        }
        let mut theta = self.bias.clone();
        theta.extend_from_slice(&self.pair);
        AgmParams::from_flat(self.n, theta)
            .map_err(|e| Error::Format(e.to_string()))?
            .with_order(self.order.clone())
            .map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn save(path: &Path, p: &AgmParams, provenance: Provenance) -> std::io::Result<()> {
    std::fs::write(path, Checkpoint::from_params(p, provenance).to_json())
}

pub fn load(path: &Path) -> Result<(AgmParams, Provenance)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(e.to_string()))?;
    let ck = Checkpoint::from_json(&text)?;
    Ok((ck.to_params()?, ck.provenance))
}
