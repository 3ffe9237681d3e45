//! Scaling harness: incremental PAL against the per-step naive evaluation.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::memory::{OpCounter, ReducedMemory};
use crate::pal::{pal_eval_naive, HalfPlaneGrid, IncrementalPal, TriangularMeasure};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Largest `n` timed on the naive path.
    pub naive_max: usize,
    pub grid_side: usize,
    /// Timed runs per point (a warm-up run is discarded).
    pub runs: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1_000, 10_000, 100_000, 1_000_000],
            naive_max: 100_000,
            grid_side: 64,
            runs: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchPath {
    Fast,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub path: BenchPath,
    pub n: usize,
    pub grid: usize,
    pub median_seconds: f64,
    pub pushes: u64,
    pub pops: u64,
    pub updates: u64,
    /// Checksum of the final output, identical across paths.
    pub last_output: f64,
}

/// Gaussian random walk with unit steps, starting at 0.
pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += rng.sample::<f64, _>(StandardNormal);
            x
        })
        .collect()
}

/// Uniform random weights in `[-1, 1]` on a grid covering `[-range, range]`.
pub fn random_measure(side: usize, range: f64, seed: u64) -> Result<TriangularMeasure<f64>> {
    let grid = HalfPlaneGrid::new(side, 2.0 * range / side as f64, -range)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(TriangularMeasure::from_fn(grid, |_, _| {
        rng.gen_range(-1.0..=1.0)
    }))
}

fn run_fast(m: &TriangularMeasure<f64>, u: &[f64]) -> (f64, OpCounter) {
    let mut pal = IncrementalPal::new(m);
    for &x in u {
        pal.push(x);
    }
    (*pal.value(), pal.memory().ops())
}

fn run_naive(m: &TriangularMeasure<f64>, u: &[f64]) -> (f64, OpCounter) {
    let mut rm = ReducedMemory::new();
    let mut y = 0.0;
    for &x in u {
        rm.update(x);
        y = pal_eval_naive(m, &rm);
    }
    (y, rm.ops())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn time(runs: usize, mut f: impl FnMut() -> (f64, OpCounter)) -> (f64, f64, OpCounter) {
    let (y, ops) = f();
    let secs = (0..runs.max(1))
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed().as_secs_f64()
        })
        .collect();
    (median(secs), y, ops)
}

/// Times both paths on one random walk per size.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let u = random_walk(n, cfg.seed);
        let range = u.iter().fold(1.0f64, |a, x| a.max(x.abs())) + 1.0;
        let m = random_measure(cfg.grid_side, range, cfg.seed.wrapping_add(1))?;
        let mut paths = vec![BenchPath::Fast];
        if n <= cfg.naive_max {
            paths.push(BenchPath::Naive);
        }
        for path in paths {
            let (secs, last_output, ops) = match path {
                BenchPath::Fast => time(cfg.runs, || run_fast(&m, &u)),
                BenchPath::Naive => time(cfg.runs, || run_naive(&m, &u)),
            };
            rows.push(BenchRow {
                path,
                n,
                grid: cfg.grid_side,
                median_seconds: secs,
                pushes: ops.pushes,
                pops: ops.pops,
                updates: ops.updates,
                last_output,
            });
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(writer: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares slope of `ln t` against `ln n`.
pub fn loglog_slope(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
