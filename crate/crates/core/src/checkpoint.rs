//! Model checkpoints as self-describing JSON documents.
//!
//! A checkpoint records the model kind, the seed it was initialized from, the
//! layer dims and activations and every parameter. Floats are written with
//! shortest round-trip formatting, so `write` followed by `read` restores
//! parameters bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::deepsets::DeepSet;
use crate::error::{Error, Result};
use crate::gnn::Gnn;
use crate::nn::{Activation, DenseLayer, Mlp};

pub const FORMAT_VERSION: u32 = 1;

/// Checkpoints claiming more message-passing rounds are rejected.
pub const MAX_ROUNDS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpRecord {
    pub dims: Vec<usize>,
    pub layers: Vec<LayerRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelRecord {
    Mlp {
        network: MlpRecord,
    },
    #[serde(rename = "deepset")]
    DeepSet {
        phi: MlpRecord,
        rho: MlpRecord,
    },
    Gnn {
        rounds: usize,
        color_dim: usize,
        encode: MlpRecord,
        update: MlpRecord,
        vote: MlpRecord,
        readout: MlpRecord,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub seed: u64,
    pub model: ModelRecord,
}

/// A model restored from a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum Restored {
    Mlp(Mlp),
    DeepSet(DeepSet),
    Gnn(Gnn),
}

impl From<&Mlp> for MlpRecord {
    fn from(m: &Mlp) -> Self {
        MlpRecord {
            dims: m.dims(),
            layers: m
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    in_dim: l.in_dim(),
                    out_dim: l.out_dim(),
                    activation: l.activation(),
                    weights: l.weights().to_vec(),
                    biases: l.biases().to_vec(),
                })
                .collect(),
        }
    }
}

impl MlpRecord {
    pub fn to_mlp(&self) -> Result<Mlp> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                DenseLayer::new(
                    l.in_dim,
                    l.out_dim,
                    l.weights.clone(),
                    l.biases.clone(),
                    l.activation,
                )
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mlp = Mlp::new(layers).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if mlp.dims() != self.dims {
            return Err(Error::Checkpoint(format!(
                "declared dims {:?} disagree with layers {:?}",
                self.dims,
                mlp.dims()
            )));
        }
        Ok(mlp)
    }
}

impl Checkpoint {
    pub fn from_mlp(m: &Mlp, seed: u64) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            seed,
            model: ModelRecord::Mlp { network: m.into() },
        }
    }

    pub fn from_deepset(d: &DeepSet, seed: u64) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            seed,
            model: ModelRecord::DeepSet {
                phi: d.phi().into(),
                rho: d.rho().into(),
            },
        }
    }

    pub fn from_gnn(g: &Gnn, seed: u64) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            seed,
            model: ModelRecord::Gnn {
                rounds: g.rounds(),
                color_dim: g.color_dim(),
                encode: g.encode().into(),
                update: g.update().into(),
                vote: g.vote().into(),
                readout: g.readout().into(),
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.model {
            ModelRecord::Mlp { .. } => "mlp",
            ModelRecord::DeepSet { .. } => "deepset",
            ModelRecord::Gnn { .. } => "gnn",
        }
    }

    /// Rebuilds and validates the model.
    pub fn restore(&self) -> Result<Restored> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {}",
                self.format_version
            )));
        }
        let wrap = |e: Error| match e {
            Error::Checkpoint(_) => e,
            other => Error::Checkpoint(other.to_string()),
        };
        Ok(match &self.model {
            ModelRecord::Mlp { network } => Restored::Mlp(network.to_mlp()?),
            ModelRecord::DeepSet { phi, rho } => {
                Restored::DeepSet(DeepSet::new(phi.to_mlp()?, rho.to_mlp()?).map_err(wrap)?)
            }
            ModelRecord::Gnn {
                rounds,
                color_dim,
                encode,
                update,
                vote,
                readout,
            } => {
                if *rounds > MAX_ROUNDS {
                    return Err(Error::Checkpoint(format!(
                        "{rounds} rounds exceeds {MAX_ROUNDS}"
                    )));
                }
                let g = Gnn::new(
                    encode.to_mlp()?,
                    update.to_mlp()?,
                    vote.to_mlp()?,
                    readout.to_mlp()?,
                    *rounds,
                )
                .map_err(wrap)?;
                if g.color_dim() != *color_dim {
                    return Err(Error::Checkpoint(format!(
                        "declared color dim {color_dim} but encoder takes {}",
                        g.color_dim()
                    )));
                }
                Restored::Gnn(g)
            }
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and validates a checkpoint document.
    pub fn parse(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        ck.restore()?;
        Ok(ck)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut s = String::new();
        r.read_to_string(&mut s)?;
        Checkpoint::parse(&s)
    }
}
