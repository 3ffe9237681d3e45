use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::sweep::{sample_fields, SpinSystem};

/// Field step of the criticality scan.
pub const SCAN_STEP: f64 = 0.01;

/// Mean-field critical disorder for Gaussian fields, where
/// `2 J P(0) = 1`: `sqrt(2/pi) J`.
pub fn critical_disorder(j: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * j
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub disorder: f64,
    pub max_jump: f64,
}

/// Largest single-step change of `m` on the ascending branch from negative
/// saturation, with field step [`SCAN_STEP`].
pub fn max_jump(j: f64, disorder: f64, n: usize, seed: u64) -> Result<f64> {
    let fields = sample_fields(n, disorder, seed);
    let h_max = 2.0 * j + 8.0 * disorder + 1.0;
    let steps = (2.0 * h_max / SCAN_STEP).ceil() as usize;
    let mut system = SpinSystem::new(&fields, j);
    system.relax(-h_max)?;
    let mut prev = system.magnetization();
    let mut best: f64 = 0.0;
    for t in 1..=steps {
        system.relax(-h_max + t as f64 * SCAN_STEP)?;
        let m = system.magnetization();
        best = best.max(m - prev);
        prev = m;
    }
    Ok(best)
}

/// Max jump per disorder value; realisations run in parallel.
pub fn criticality_scan(j: f64, disorders: &[f64], n: usize, seed: u64) -> Result<Vec<ScanPoint>> {
    disorders
        .par_iter()
        .map(|&d| {
            Ok(ScanPoint {
                disorder: d,
                max_jump: max_jump(j, d, n, seed)?,
            })
        })
        .collect()
}

/// Disorder at which the max jump first falls below `level`, linearly
/// interpolated between scan points. `None` if it never crosses.
pub fn critical_estimate(scan: &[ScanPoint], level: f64) -> Option<f64> {
    let mut pts = scan.to_vec();
    pts.sort_by(|a, b| a.disorder.total_cmp(&b.disorder));
    pts.windows(2)
        .find(|w| w[0].max_jump >= level && w[1].max_jump < level)
        .map(|w| {
            let t = (w[0].max_jump - level) / (w[0].max_jump - w[1].max_jump);
            w[0].disorder + t * (w[1].disorder - w[0].disorder)
        })
}
