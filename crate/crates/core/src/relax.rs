#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Smooth relay relaxation with reverse-mode gradients.
//!
//! The state follows `s' = s (1 - p) + (1 - s) q` with
//! `p = σ((β - u) / τ)` and `q = σ((u - α) / τ)`, σ the logistic function.

use crate::error::{Error, Result};
use crate::relay::{relay_step, RelayState, RelayThresholds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothRelayParams {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
}

impl SmoothRelayParams {
    pub fn new(alpha: f64, beta: f64, tau: f64) -> Result<Self> {
        if !(alpha >= beta) {
            return Err(Error::InvalidThresholds { alpha, beta });
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidTemperature(tau));
        }
        Ok(Self { alpha, beta, tau })
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, tau)
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// States `s_0..s_n` of the smooth relay.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothTrace {
    pub states: Vec<f64>,
}

impl SmoothTrace {
    pub fn last(&self) -> f64 {
        *self.states.last().expect("trace holds s0")
    }
}

fn check_s0(s0: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s0) {
        Ok(())
    } else {
        Err(Error::InvalidInitialState(s0))
    }
}

fn gates(p: &SmoothRelayParams, u: f64) -> (f64, f64, f64, f64) {
    let x = (p.beta - u) / p.tau;
    let y = (u - p.alpha) / p.tau;
    (sigmoid(x), sigmoid(y), x, y)
}

pub fn smooth_unroll(u: &[f64], p: &SmoothRelayParams, s0: f64) -> Result<SmoothTrace> {
    check_s0(s0)?;
    let mut states = Vec::with_capacity(u.len() + 1);
    let mut s = s0;
    states.push(s);
    for &v in u {
        let (pg, qg, _, _) = gates(p, v);
        s = s * (1.0 - pg) + (1.0 - s) * qg;
        states.push(s);
    }
    Ok(SmoothTrace { states })
}

/// Partials of the final state `s_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothGrad {
    pub value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub s0: f64,
    pub u: Vec<f64>,
}

/// Exact gradient of `s_n` by one backward sweep over the stored states.
pub fn smooth_grad(u: &[f64], p: &SmoothRelayParams, s0: f64) -> Result<SmoothGrad> {
    let trace = smooth_unroll(u, p, s0)?;
    let mut g = 1.0;
    let mut out = SmoothGrad {
        value: trace.last(),
        alpha: 0.0,
        beta: 0.0,
        tau: 0.0,
        s0: 0.0,
        u: vec![0.0; u.len()],
    };
    for t in (0..u.len()).rev() {
        let s = trace.states[t];
        let (pg, qg, x, y) = gates(p, u[t]);
        let dx = -g * s * pg * (1.0 - pg);
        let dy = g * (1.0 - s) * qg * (1.0 - qg);
        out.beta += dx / p.tau;
        out.alpha -= dy / p.tau;
        out.u[t] = (dy - dx) / p.tau;
        out.tau -= (dx * x + dy * y) / p.tau;
        g *= 1.0 - pg - qg;
    }
    out.s0 = g;
    Ok(out)
}

/// Central finite-difference gradient, the oracle for [`smooth_grad`].
pub fn smooth_grad_fd(u: &[f64], p: &SmoothRelayParams, s0: f64, h: f64) -> Result<SmoothGrad> {
    let eval =
        |u: &[f64], p: &SmoothRelayParams, s0: f64| smooth_unroll(u, p, s0).map(|t| t.last());
    let value = eval(u, p, s0)?;
    let fd = |plus: f64, minus: f64| (plus - minus) / (2.0 * h);
    let shifted = |da: f64, db: f64, dt: f64| SmoothRelayParams {
        alpha: p.alpha + da,
        beta: p.beta + db,
        tau: p.tau + dt,
    };
    let alpha = fd(
        eval(u, &shifted(h, 0.0, 0.0), s0)?,
        eval(u, &shifted(-h, 0.0, 0.0), s0)?,
    );
    let beta = fd(
        eval(u, &shifted(0.0, h, 0.0), s0)?,
        eval(u, &shifted(0.0, -h, 0.0), s0)?,
    );
    let tau = fd(
        eval(u, &shifted(0.0, 0.0, h), s0)?,
        eval(u, &shifted(0.0, 0.0, -h), s0)?,
    );
    let ds0 = if s0 - h >= 0.0 && s0 + h <= 1.0 {
        fd(eval(u, p, s0 + h)?, eval(u, p, s0 - h)?)
    } else {
        f64::NAN
    };
    let mut grads = Vec::with_capacity(u.len());
    let mut v = u.to_vec();
    for t in 0..u.len() {
        v[t] = u[t] + h;
        let plus = eval(&v, p, s0)?;
        v[t] = u[t] - h;
        let minus = eval(&v, p, s0)?;
        v[t] = u[t];
        grads.push(fd(plus, minus));
    }
    Ok(SmoothGrad {
        value,
        alpha,
        beta,
        tau,
        s0: ds0,
        u: grads,
    })
}

/// Relative error with the denominator floored at `floor`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Result of driving the smooth relay down a temperature schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealReport {
    /// Sample indices closer than `delta` to a threshold. When non-empty
    /// nothing else was computed.
    pub violations: Vec<usize>,
    pub taus: Vec<f64>,
    /// Max over steps of `|s_t - r_t|` for each schedule entry.
    pub errors: Vec<f64>,
    pub monotone: bool,
    /// Max error at `τ = δ / 20`.
    pub error_at_floor: f64,
}

impl AnnealReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.monotone && self.error_at_floor < 1e-6
    }
}

fn max_relay_error(u: &[f64], p: &SmoothRelayParams) -> Result<f64> {
    let trace = smooth_unroll(u, p, 0.0)?;
    let th = RelayThresholds::new(p.alpha, p.beta)?;
    let mut r = RelayState::Off;
    let mut worst = 0.0f64;
    for (t, v) in u.iter().enumerate() {
        r = relay_step(r, v, &th);
        worst = worst.max((trace.states[t + 1] - r.bit() as f64).abs());
    }
    Ok(worst)
}

/// Compares the smooth relay (started at `s0 = 0`) with the binary relay
/// along a descending temperature schedule.
pub fn anneal_check(
    u: &[f64],
    alpha: f64,
    beta: f64,
    delta: f64,
    taus: &[f64],
) -> Result<AnnealReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "distance margin must be positive, got {delta}"
        )));
    }
    if taus.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidConfig(
            "temperature schedule must be descending".into(),
        ));
    }
    let base = SmoothRelayParams::new(alpha, beta, 1.0)?;
    let violations: Vec<usize> = u
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - alpha).abs() < delta || (v - beta).abs() < delta)
        .map(|(t, _)| t)
        .collect();
    if !violations.is_empty() {
        return Ok(AnnealReport {
            violations,
            taus: taus.to_vec(),
            errors: vec![],
            monotone: false,
            error_at_floor: f64::NAN,
        });
    }
    let errors = taus
        .iter()
        .map(|&tau| max_relay_error(u, &base.with_tau(tau)?))
        .collect::<Result<Vec<_>>>()?;
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    let error_at_floor = max_relay_error(u, &base.with_tau(delta / 20.0)?)?;
    Ok(AnnealReport {
        violations,
        taus: taus.to_vec(),
        errors,
        monotone,
        error_at_floor,
    })
}
