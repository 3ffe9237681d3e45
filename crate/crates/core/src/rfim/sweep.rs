use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean-field random-field Ising model run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfimConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub disorder_std: f64,
    #[serde(rename = "H_grid")]
    pub h_grid: Vec<f64>,
    pub seed: u64,
}

impl RfimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("N must be >= 1".into()));
        }
        if !(self.j >= 0.0 && self.j.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "J must be finite and >= 0, got {}",
                self.j
            )));
        }
        if !(self.disorder_std >= 0.0 && self.disorder_std.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "disorder_std must be finite and >= 0, got {}",
                self.disorder_std
            )));
        }
        if self.h_grid.is_empty() || self.h_grid.iter().any(|h| !h.is_finite()) {
            return Err(Error::InvalidConfig(
                "H_grid must be non-empty and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Gaussian random fields for this seed.
    pub fn sample_fields(&self) -> Vec<f64> {
        sample_fields(self.n, self.disorder_std, self.seed)
    }
}

pub fn sample_fields(n: usize, std: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).expect("finite non-negative std");
    (0..n).map(|_| normal.sample(&mut rng)).collect()
}

/// `-h_max -> h_max -> -h_max` in steps of `step`, endpoints included.
pub fn loop_schedule(h_max: f64, step: f64) -> Vec<f64> {
    let k = (2.0 * h_max / step).round() as usize;
    let up = (0..=k).map(|t| -h_max + t as f64 * step);
    let down = (0..k).rev().map(|t| -h_max + t as f64 * step);
    up.chain(down).collect()
}

/// Spins at zero temperature, stored as the number of up spins among the
/// fields sorted in decreasing order (the up set is always a top set).
#[derive(Debug, Clone)]
pub struct SpinSystem {
    sorted: Vec<f64>,
    order: Vec<usize>,
    j: f64,
    up: usize,
}

impl SpinSystem {
    /// All spins down.
    pub fn new(fields: &[f64], j: f64) -> Self {
        let mut order: Vec<usize> = (0..fields.len()).collect();
        order.sort_by(|&a, &b| fields[b].total_cmp(&fields[a]));
        let sorted = order.iter().map(|&i| fields[i]).collect();
        Self {
            sorted,
            order,
            j,
            up: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn up_count(&self) -> usize {
        self.up
    }

    pub fn magnetization(&self) -> f64 {
        let n = self.len() as f64;
        (2.0 * self.up as f64 - n) / n
    }

    /// Synchronous zero-temperature relaxation at field `h`:
    /// `sigma_i = sign(J m + h_i + H)`, a spin with zero local field keeps its
    /// value. Returns the number of flipped spins.
    pub fn relax(&mut self, h: f64) -> Result<usize> {
        let start = self.up;
        for _ in 0..=self.len() + 1 {
            let thr = -(self.j * self.magnetization() + h);
            let above = self.sorted.partition_point(|&x| x > thr);
            let at_least = self.sorted.partition_point(|&x| x >= thr);
            let next = self.up.clamp(above, at_least);
            if next == self.up {
                return Ok(start.abs_diff(self.up));
            }
            self.up = next;
        }
        Err(Error::NoConvergence(format!(
            "relaxation at H = {h} did not reach a fixed point"
        )))
    }

    /// Spin values in the original field order.
    pub fn spins(&self) -> Vec<i8> {
        let mut s = vec![-1i8; self.len()];
        for &i in &self.order[..self.up] {
            s[i] = 1;
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "H")]
    pub h: f64,
    pub m: f64,
    pub branch: Branch,
    pub avalanche_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn branch(&self, b: Branch) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(move |p| p.branch == b)
    }

    /// Largest change of `m` between consecutive points of one branch.
    pub fn max_jump(&self) -> f64 {
        self.points
            .windows(2)
            .filter(|w| w[0].branch == w[1].branch)
            .map(|w| (w[1].m - w[0].m).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Drives `system` through `h_grid`, relaxing at every point.
pub fn sweep_system(system: &mut SpinSystem, h_grid: &[f64]) -> Result<SweepResult> {
    let mut points = Vec::with_capacity(h_grid.len());
    let mut branch = Branch::Up;
    for (t, &h) in h_grid.iter().enumerate() {
        if t > 0 {
            if h > h_grid[t - 1] {
                branch = Branch::Up;
            } else if h < h_grid[t - 1] {
                branch = Branch::Down;
            }
        }
        let avalanche_size = system.relax(h)?;
        points.push(SweepPoint {
            h,
            m: system.magnetization(),
            branch,
            avalanche_size,
        });
    }
    Ok(SweepResult { points })
}

/// Sweep from negative saturation along the configured schedule.
pub fn rfim_sweep(cfg: &RfimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut system = SpinSystem::new(&cfg.sample_fields(), cfg.j);
    sweep_system(&mut system, &cfg.h_grid)
}

/// Drives the system up to `h1`, then repeatedly around the minor loop
/// `h1 -> h0 -> h1`, and reports whether every return to `h1` reproduces the
/// full spin configuration of the first visit.
pub fn return_point_check(
    fields: &[f64],
    j: f64,
    h_start: f64,
    h0: f64,
    h1: f64,
    step: f64,
    loops: usize,
) -> Result<bool> {
    let ramp = |a: f64, b: f64| -> Vec<f64> {
        let k = ((b - a).abs() / step).ceil() as usize;
        (1..=k).map(|t| a + (b - a) * t as f64 / k as f64).collect()
    };
    let mut system = SpinSystem::new(fields, j);
    system.relax(h_start)?;
    for h in ramp(h_start, h1) {
        system.relax(h)?;
    }
    let first = system.spins();
    for _ in 0..loops {
        for h in ramp(h1, h0).into_iter().chain(ramp(h0, h1)) {
            system.relax(h)?;
        }
        if system.spins() != first {
            return Ok(false);
        }
    }
    Ok(true)
}
