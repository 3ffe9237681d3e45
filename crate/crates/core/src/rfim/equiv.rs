use statrs::function::erf::erf;

use crate::error::{Error, Result};

use super::sweep::{RfimConfig, SpinSystem};

const DAMPING: f64 = 0.5;
const TOL: f64 = 1e-10;
const MAX_ITER: usize = 10_000;

/// Damped fixed point of `m = f(m)` started from `m0`.
fn damped_fixed_point(m0: f64, f: impl Fn(f64) -> f64) -> Result<(f64, usize)> {
    let mut m = m0;
    for it in 1..=MAX_ITER {
        let next = DAMPING * m + (1.0 - DAMPING) * f(m);
        if (next - m).abs() < TOL {
            return Ok((next, it));
        }
        m = next;
    }
    Err(Error::NoConvergence(format!(
        "self-consistency residual {:e} after {MAX_ITER} iterations",
        (f(m) - m).abs()
    )))
}

/// Relay ensemble over fixed random fields: relay `i` has
/// `alpha_i = beta_i = -h_i - J m` in the external field, so its state reads
/// `H >= -h_i - J m`. Hysteresis is carried by the self-consistent `m`,
/// which is solved from the previous step's value.
#[derive(Debug, Clone)]
pub struct RelayEnsemble {
    sorted: Vec<f64>,
    j: f64,
    m: f64,
}

impl RelayEnsemble {
    pub fn new(fields: &[f64], j: f64) -> Self {
        let mut sorted = fields.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        Self { sorted, j, m: -1.0 }
    }

    fn output(&self, h: f64, m: f64) -> f64 {
        let n = self.sorted.len() as f64;
        let on = self.sorted.partition_point(|&x| h >= -x - self.j * m) as f64;
        (2.0 * on - n) / n
    }

    /// Fraction-weighted relay output after relaxing `m` at field `h`.
    pub fn step(&mut self, h: f64) -> Result<f64> {
        let (m, _) = damped_fixed_point(self.m, |m| self.output(h, m))?;
        self.m = self.output(h, m);
        Ok(self.m)
    }
}

/// The `N -> infinity` limit with Gaussian fields: `m = erf((H + J m) / (s sqrt 2))`.
#[derive(Debug, Clone)]
pub struct ContinuumEnsemble {
    j: f64,
    std: f64,
    m: f64,
}

impl ContinuumEnsemble {
    pub fn new(j: f64, std: f64) -> Self {
        Self { j, std, m: -1.0 }
    }

    fn output(&self, h: f64, m: f64) -> f64 {
        let x = h + self.j * m;
        if self.std == 0.0 {
            return if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                m
            };
        }
        erf(x / (self.std * std::f64::consts::SQRT_2))
    }

    pub fn step(&mut self, h: f64) -> Result<f64> {
        let (m, _) = damped_fixed_point(self.m, |m| self.output(h, m))?;
        self.m = m;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivReport {
    /// Max over the schedule of `|m_relay - m_spin|`, same fields.
    pub deviation: f64,
    /// Max over the schedule of `|m_continuum - m_spin|`.
    pub continuum_deviation: f64,
}

pub fn preisach_equiv_check(cfg: &RfimConfig) -> Result<EquivReport> {
    cfg.validate()?;
    let fields = cfg.sample_fields();
    let mut spins = SpinSystem::new(&fields, cfg.j);
    let mut relays = RelayEnsemble::new(&fields, cfg.j);
    let mut continuum = ContinuumEnsemble::new(cfg.j, cfg.disorder_std);
    let mut report = EquivReport {
        deviation: 0.0,
        continuum_deviation: 0.0,
    };
    for &h in &cfg.h_grid {
        spins.relax(h)?;
        let ms = spins.magnetization();
        report.deviation = report.deviation.max((relays.step(h)? - ms).abs());
        report.continuum_deviation = report
            .continuum_deviation
            .max((continuum.step(h)? - ms).abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rfim::sweep::loop_schedule;

    fn cfg(n: usize, j: f64, std: f64, seed: u64) -> RfimConfig {
        RfimConfig {
            n,
            j,
            disorder_std: std,
            h_grid: loop_schedule(6.0, 0.02),
            seed,
        }
    }

    #[test]
    fn decoupled_is_exact() {
        let r = preisach_equiv_check(&cfg(3000, 0.0, 1.0, 1)).unwrap();
        assert_eq!(r.deviation, 0.0);
    }

    #[test]
    fn coupled_relays_track_spins() {
        for std in [0.5, 1.2] {
            let r = preisach_equiv_check(&cfg(5000, 1.0, std, 2)).unwrap();
            assert!(r.deviation < 1e-9, "{std}: {r:?}");
        }
    }

    #[test]
    fn continuum_limit_fixed_points() {
        let mut c = ContinuumEnsemble::new(0.0, 1.0);
        assert!((c.step(0.0).unwrap()).abs() < 1e-9);
        let mut c = ContinuumEnsemble::new(1.0, 0.5);
        c.step(-3.0).unwrap();
        assert!(c.step(0.0).unwrap() < -0.9);
    }
}
