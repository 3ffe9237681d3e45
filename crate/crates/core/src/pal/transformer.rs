use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::grid::{HalfPlaneGrid, TriangularMeasure};
use super::mpal::{HeadConfig, MpalState};

/// Variance below which layer normalisation returns the bias vector.
pub const LN_VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerNorm {
    pub gain: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerNorm {
    pub fn identity(d: usize) -> Self {
        Self {
            gain: vec![1.0; d],
            bias: vec![0.0; d],
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        if var < LN_VARIANCE_FLOOR {
            return self.bias.clone();
        }
        let sd = var.sqrt();
        v.iter()
            .zip(self.gain.iter().zip(&self.bias))
            .map(|(x, (g, b))| g * (x - mean) / sd + b)
            .collect()
    }
}

/// Two affine maps with a rectifier in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// `hidden x d`
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// `d x hidden`
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl Mlp {
    pub fn zeros(d: usize, hidden: usize) -> Self {
        Self {
            w1: vec![vec![0.0; d]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![vec![0.0; hidden]; d],
            b2: vec![0.0; d],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(row, b)| (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b).max(0.0))
            .collect();
        self.w2
            .iter()
            .zip(&self.b2)
            .map(|(row, b)| row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    fn check(&self, d: usize) -> Result<()> {
        let hidden = self.b1.len();
        let ok = self.w1.len() == hidden
            && self.w1.iter().all(|r| r.len() == d)
            && self.w2.len() == d
            && self.w2.iter().all(|r| r.len() == hidden)
            && self.b2.len() == d;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "mlp shapes do not match the model dimension".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeConfig {
    #[serde(default = "default_pe_base")]
    pub base: f64,
    #[serde(default = "default_true")]
    pub enabled: bool,
}

fn default_pe_base() -> f64 {
    10_000.0
}

fn default_true() -> bool {
    true
}

impl Default for PeConfig {
    fn default() -> Self {
        Self {
            base: default_pe_base(),
            enabled: true,
        }
    }
}

/// Sinusoidal position encoding: `sin` on even coordinates, `cos` on odd.
pub fn positional_encoding(n: usize, d: usize, base: f64) -> Vec<f64> {
    (0..d)
        .map(|k| {
            let rate = base.powf((2 * (k / 2)) as f64 / d as f64);
            let angle = n as f64 / rate;
            if k % 2 == 0 {
                angle.sin()
            } else {
                angle.cos()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub side: usize,
    pub delta: f64,
    #[serde(default)]
    pub origin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub in_proj: Vec<f64>,
    pub out_proj: Vec<f64>,
    pub grid: GridSpec,
    /// `[i, j, mu]` triples.
    pub cells: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LnConfig {
    pub ln1: LayerNorm,
    pub ln2: LayerNorm,
}

/// On-disk layer configuration, schema version 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub version: u32,
    pub heads: Vec<HeadSpec>,
    pub mlp: Mlp,
    pub ln: LnConfig,
    #[serde(default)]
    pub pe: PeConfig,
}

/// One PAL-Transformer block with fixed weights.
///
/// Position encoding enters the residual and MLP path only; the heads read
/// the raw input so their output stays rate-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct PalTransformerLayer {
    pub heads: Vec<HeadConfig>,
    pub mlp: Mlp,
    pub ln1: LayerNorm,
    pub ln2: LayerNorm,
    pub pe: PeConfig,
    dim: usize,
}

/// Per-position intermediates of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformerTrace {
    pub mpal: Vec<Vec<f64>>,
    pub attn_out: Vec<Vec<f64>>,
    pub output: Vec<Vec<f64>>,
}

impl PalTransformerLayer {
    pub fn new(
        dim: usize,
        heads: Vec<HeadConfig>,
        mlp: Mlp,
        ln1: LayerNorm,
        ln2: LayerNorm,
        pe: PeConfig,
    ) -> Result<Self> {
        if let Some(h) = heads.iter().find(|h| h.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: h.dim(),
            });
        }
        mlp.check(dim)?;
        for ln in [&ln1, &ln2] {
            if ln.gain.len() != dim || ln.bias.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: ln.gain.len(),
                });
            }
        }
        Ok(Self {
            heads,
            mlp,
            ln1,
            ln2,
            pe,
            dim,
        })
    }

    pub fn from_config(cfg: &LayerConfig) -> Result<Self> {
        if cfg.version != crate::SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported layer config version {}",
                cfg.version
            )));
        }
        let dim = cfg.ln.ln1.gain.len();
        let heads = cfg
            .heads
            .iter()
            .map(|h| {
                let grid = HalfPlaneGrid::new(h.grid.side, h.grid.delta, h.grid.origin)?;
                let m = TriangularMeasure::from_cells(grid, h.cells.iter().copied())?;
                HeadConfig::new(h.in_proj.clone(), h.out_proj.clone(), m)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            dim,
            heads,
            cfg.mlp.clone(),
            cfg.ln.ln1.clone(),
            cfg.ln.ln2.clone(),
            cfg.pe.clone(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn forward(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(self.forward_trace(x)?.output)
    }

    pub fn forward_trace(&self, x: &[Vec<f64>]) -> Result<TransformerTrace> {
        let mut state = MpalState::new(&self.heads)?;
        let mut trace = TransformerTrace {
            mpal: Vec::new(),
            attn_out: Vec::new(),
            output: Vec::new(),
        };
        for (n, xn) in x.iter().enumerate() {
            if xn.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: xn.len(),
                });
            }
            let a = if self.heads.is_empty() {
                vec![0.0; self.dim]
            } else {
                state.step(xn)?
            };
            let z0: Vec<f64> = if self.pe.enabled {
                let pe = positional_encoding(n, self.dim, self.pe.base);
                xn.iter().zip(&pe).map(|(a, b)| a + b).collect()
            } else {
                xn.clone()
            };
            let z1 = self.ln1.apply(&add(&z0, &a));
            let z2 = self.ln2.apply(&add(&z1, &self.mlp.apply(&z1)));
            trace.mpal.push(a);
            trace.attn_out.push(z1);
            trace.output.push(z2);
        }
        Ok(trace)
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
