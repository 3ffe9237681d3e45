use crate::error::{Error, Result};
use crate::memory::ReducedMemory;

use super::eval::pal_eval_staircase;
use super::grid::TriangularMeasure;

/// One PAL head: scalar input projection, output projection and measure.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadConfig {
    pub in_proj: Vec<f64>,
    pub out_proj: Vec<f64>,
    pub measure: TriangularMeasure<f64>,
}

impl HeadConfig {
    pub fn new(
        in_proj: Vec<f64>,
        out_proj: Vec<f64>,
        measure: TriangularMeasure<f64>,
    ) -> Result<Self> {
        if in_proj.len() != out_proj.len() {
            return Err(Error::DimensionMismatch {
                expected: in_proj.len(),
                got: out_proj.len(),
            });
        }
        Ok(Self {
            in_proj,
            out_proj,
            measure,
        })
    }

    pub fn dim(&self) -> usize {
        self.in_proj.len()
    }

    fn project(&self, x: &[f64]) -> f64 {
        self.in_proj.iter().zip(x).map(|(w, v)| w * v).sum()
    }
}

/// Streaming multi-head state: one reduced memory per head.
#[derive(Debug, Clone)]
pub struct MpalState<'a> {
    heads: &'a [HeadConfig],
    memories: Vec<ReducedMemory<f64>>,
    dim: usize,
}

impl<'a> MpalState<'a> {
    pub fn new(heads: &'a [HeadConfig]) -> Result<Self> {
        let dim = heads.first().map_or(0, HeadConfig::dim);
        if let Some(bad) = heads.iter().find(|h| h.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self {
            heads,
            memories: vec![ReducedMemory::new(); heads.len()],
            dim,
        })
    }

    /// Feeds one model vector and returns the layer output at this position.
    /// Heads are summed in index order.
    pub fn step(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        for (head, rm) in self.heads.iter().zip(self.memories.iter_mut()) {
            rm.update(head.project(x));
            let v = pal_eval_staircase(&head.measure, rm);
            for (o, w) in out.iter_mut().zip(&head.out_proj) {
                *o += w * v;
            }
        }
        Ok(out)
    }

    pub fn memories(&self) -> &[ReducedMemory<f64>] {
        &self.memories
    }
}

/// `sum_h W_O^h * PAL_{mu^h}(W_I^h x_{0:n})`, evaluated at the last position.
pub fn mpal_forward(heads: &[HeadConfig], x: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut state = MpalState::new(heads)?;
    let mut out = vec![0.0; state.dim];
    for v in x {
        out = state.step(v)?;
    }
    Ok(out)
}
