use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Threshold grid `alpha_i = origin + i*delta`, `beta_j = origin + j*delta`,
/// `1 <= j <= i <= L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneGrid<T = f64> {
    side: usize,
    delta: T,
    origin: T,
    nodes: Vec<T>,
}

impl<T: Scalar> HalfPlaneGrid<T> {
    pub fn new(side: usize, delta: T, origin: T) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidGrid("side must be >= 1".into()));
        }
        if delta <= T::zero() {
            return Err(Error::InvalidGrid("delta must be positive".into()));
        }
        let mut nodes = Vec::with_capacity(side);
        let mut x = origin.clone();
        for _ in 0..side {
            x = x + delta.clone();
            nodes.push(x.clone());
        }
        Ok(Self {
            side,
            delta,
            origin,
            nodes,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn delta(&self) -> &T {
        &self.delta
    }

    pub fn origin(&self) -> &T {
        &self.origin
    }

    /// Node value for 1-based index `i`.
    pub fn node(&self, i: usize) -> &T {
        &self.nodes[i - 1]
    }

    pub fn cell_count(&self) -> usize {
        self.side * (self.side + 1) / 2
    }

    /// Number of nodes `<= x`.
    pub(crate) fn count_le(&self, x: &T) -> usize {
        self.nodes.partition_point(|n| n <= x)
    }

    /// Number of nodes `< x`.
    pub(crate) fn count_lt(&self, x: &T) -> usize {
        self.nodes.partition_point(|n| n < x)
    }

    /// Iterates `(i, j)` over the triangle, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.side).flat_map(|i| (1..=i).map(move |j| (i, j)))
    }

    /// Lossless conversion into another scalar type through `f64` values.
    pub fn to_f64_grid(&self) -> HalfPlaneGrid<f64> {
        HalfPlaneGrid::new(self.side, self.delta.to_f64(), self.origin.to_f64())
            .expect("valid grid")
    }
}

/// Weights `mu_ij` on the triangle with 2D prefix sums.
///
/// The triangle is embedded in an `(L+1) x (L+1)` square, zero above the
/// diagonal and in the padding row/column, so rectangle sums need no branches.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularMeasure<T = f64> {
    grid: HalfPlaneGrid<T>,
    weights: Vec<T>,
    prefix: Vec<T>,
}

impl<T: Scalar> TriangularMeasure<T> {
    pub fn zeros(grid: HalfPlaneGrid<T>) -> Self {
        let n = (grid.side + 1) * (grid.side + 1);
        Self {
            grid,
            weights: vec![T::zero(); n],
            prefix: vec![T::zero(); n],
        }
    }

    /// Builds from `(i, j, mu)` triples; repeated cells accumulate.
    pub fn from_cells<I>(grid: HalfPlaneGrid<T>, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut m = Self::zeros(grid);
        for (i, j, mu) in cells {
            if j == 0 || i < j || i > m.grid.side {
                return Err(Error::CellOutsideTriangle { i, j });
            }
            let k = m.idx(i, j);
            m.weights[k] = m.weights[k].clone() + mu;
        }
        m.rebuild_prefix();
        Ok(m)
    }

    /// Builds by evaluating `f(i, j)` on every cell.
    pub fn from_fn(grid: HalfPlaneGrid<T>, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(grid);
        for i in 1..=m.grid.side {
            for j in 1..=i {
                let k = m.idx(i, j);
                m.weights[k] = f(i, j);
            }
        }
        m.rebuild_prefix();
        m
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.grid.side + 1) + j
    }

    fn rebuild_prefix(&mut self) {
        let s = self.grid.side + 1;
        for i in 0..s {
            for j in 0..s {
                let mut v = self.weights[i * s + j].clone();
                if i > 0 {
                    v = v + self.prefix[(i - 1) * s + j].clone();
                }
                if j > 0 {
                    v = v + self.prefix[i * s + j - 1].clone();
                }
                if i > 0 && j > 0 {
                    v = v - self.prefix[(i - 1) * s + j - 1].clone();
                }
                self.prefix[i * s + j] = v;
            }
        }
    }

    pub fn grid(&self) -> &HalfPlaneGrid<T> {
        &self.grid
    }

    pub fn weight(&self, i: usize, j: usize) -> &T {
        &self.weights[self.idx(i, j)]
    }

    /// Nonzero cells, row-major.
    pub fn nonzero_cells(&self) -> Vec<(usize, usize, T)> {
        self.grid
            .cells()
            .filter_map(|(i, j)| {
                let w = self.weight(i, j);
                (!w.is_zero()).then(|| (i, j, w.clone()))
            })
            .collect()
    }

    /// Sum of weights over `i in i0..=i1`, `j in j0..=j1` (1-based, clamped;
    /// empty ranges give zero).
    pub fn rect_sum(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> T {
        let i0 = i0.max(1);
        let j0 = j0.max(1);
        let i1 = i1.min(self.grid.side);
        let j1 = j1.min(self.grid.side);
        if i0 > i1 || j0 > j1 {
            return T::zero();
        }
        let s = self.grid.side + 1;
        let p = |i: usize, j: usize| self.prefix[i * s + j].clone();
        p(i1, j1) - p(i0 - 1, j1) - p(i1, j0 - 1) + p(i0 - 1, j0 - 1)
    }

    pub fn total(&self) -> T {
        self.rect_sum(1, self.grid.side, 1, self.grid.side)
    }

    /// Sum of absolute weights.
    pub fn total_abs(&self) -> T {
        self.weights
            .iter()
            .fold(T::zero(), |acc, w| acc + w.abs_val())
    }

    /// `a*self + b*other` over the same grid.
    pub fn combine(&self, a: &T, other: &Self, b: &T) -> Self {
        assert_eq!(self.grid.side, other.grid.side, "grid mismatch");
        Self::from_fn(self.grid.clone(), |i, j| {
            a.clone() * self.weight(i, j).clone() + b.clone() * other.weight(i, j).clone()
        })
    }
}

/// Reads a measure CSV (`i,j,mu`); rows with `i < j` are rejected.
pub fn read_measure_csv<R: Read>(
    reader: R,
    grid: HalfPlaneGrid<f64>,
) -> Result<TriangularMeasure<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["i", "j", "mu"] {
        return Err(Error::Parse {
            row: 1,
            message: "expected header `i,j,mu`".into(),
        });
    }
    let mut cells = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        let field = |n: usize| rec.get(n).unwrap_or("");
        let bad = |what: &str| Error::Parse {
            row,
            message: format!("bad {what}"),
        };
        let i: usize = field(0).parse().map_err(|_| bad("i"))?;
        let j: usize = field(1).parse().map_err(|_| bad("j"))?;
        let mu: f64 = field(2).parse().map_err(|_| bad("mu"))?;
        cells.push((i, j, mu));
    }
    TriangularMeasure::from_cells(grid, cells)
}

pub fn write_measure_csv<W: Write>(writer: W, m: &TriangularMeasure<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "j", "mu"])?;
    for (i, j, mu) in m.nonzero_cells() {
        w.write_record([i.to_string(), j.to_string(), format!("{mu}")])?;
    }
    w.flush()?;
    Ok(())
}
