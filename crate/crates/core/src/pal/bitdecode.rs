use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::memory::ReducedMemory;

use super::eval::pal_eval_staircase;
use super::grid::{HalfPlaneGrid, TriangularMeasure};

/// Number of binary heads needed to index `k` code values.
pub fn head_count(k: usize) -> usize {
    match k {
        0 | 1 => 0,
        _ => (usize::BITS - (k - 1).leading_zeros()) as usize,
    }
}

/// Grid index of the node closest to `x`, if it lies on the grid with room
/// for the cell one row below it.
fn nearest_node(grid: &HalfPlaneGrid<f64>, x: f64) -> Option<usize> {
    let i = ((x - grid.origin()) / grid.delta()).round();
    (i >= 2.0 && i <= grid.side() as f64).then_some(i as usize)
}

/// Weighting of the code cells in the bit-decode measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitWeights {
    /// Unit weight on the cell of every code whose index has the bit set.
    Indicator,
    /// Weight `b(c) - b(c')` where `c'` is the next lower code. Every code
    /// below the current input is necessarily switched on, so the sum over
    /// active cells telescopes to the bit of the highest active code.
    Telescoped,
}

/// One measure per bit of the code index.
///
/// Code `c` owns the cell whose alpha is the node nearest to `codes[c]` and
/// whose beta is one node below.
pub fn bit_decode_measures(
    grid: &HalfPlaneGrid<f64>,
    codes: &[f64],
    weights: BitWeights,
) -> Result<Vec<TriangularMeasure<f64>>> {
    let delta = *grid.delta();
    let mut order: Vec<usize> = (0..codes.len()).collect();
    order.sort_by(|&a, &b| codes[a].total_cmp(&codes[b]));
    if let Some(w) = order.windows(2).find(|w| codes[w[1]] - codes[w[0]] < delta) {
        return Err(Error::CodesTooClose(format!(
            "{} and {} are closer than the grid spacing {delta}",
            codes[w[0]], codes[w[1]]
        )));
    }
    let nodes = codes
        .iter()
        .map(|&c| {
            nearest_node(grid, c)
                .ok_or_else(|| Error::InvalidGrid(format!("code {c} has no cell on the grid")))
        })
        .collect::<Result<Vec<_>>>()?;
    let bit = |c: usize, h: usize| (c >> h & 1) as f64;
    let measures = (0..head_count(codes.len()))
        .map(|h| {
            let cells = order.iter().enumerate().filter_map(|(rank, &c)| {
                let w = match weights {
                    BitWeights::Indicator => bit(c, h),
                    BitWeights::Telescoped => {
                        bit(c, h)
                            - if rank == 0 {
                                0.0
                            } else {
                                bit(order[rank - 1], h)
                            }
                    }
                };
                (w != 0.0).then(|| (nodes[c], nodes[c] - 1, w))
            });
            TriangularMeasure::from_cells(grid.clone(), cells)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(measures)
}

/// Binary decode of head outputs, least significant bit first. An output
/// counts as a set bit when it exceeds one half.
pub fn decode_top(outputs: &[f64]) -> usize {
    outputs
        .iter()
        .enumerate()
        .filter(|(_, &o)| o > 0.5)
        .map(|(h, _)| 1usize << h)
        .sum()
}

/// `C_max - (d (k + 1) + i) delta` with `C_max = d_max (k + 1) delta`.
pub fn cantor_code(i: usize, d: usize, k: usize, d_max: usize, delta: f64) -> f64 {
    let c_max = (d_max * (k + 1)) as f64 * delta;
    c_max - (d * (k + 1) + i) as f64 * delta
}

/// Signal that builds `stack` (bottom first, symbols `1..=k`) by the
/// two-sample PUSH rule, starting from a rest value above every code.
pub fn cantor_stack_signal(
    stack: &[usize],
    k: usize,
    d_max: usize,
    delta: f64,
    eps: f64,
) -> Vec<f64> {
    let mut u = vec![cantor_code(0, 0, k, d_max, delta) + delta];
    for (d, &i) in stack.iter().enumerate() {
        let c = cantor_code(i, d + 1, k, d_max, delta);
        u.push(c + eps);
        u.push(c - eps);
    }
    u
}

/// Outcome of the exhaustive injectivity experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityReport {
    pub weights: BitWeights,
    pub k: usize,
    pub d_max: usize,
    pub heads: usize,
    pub configurations: usize,
    pub distinct_outputs: usize,
    /// Whether stacks with different top elements always give different outputs.
    pub top_injective: bool,
    /// Whether different stacks always give different outputs.
    pub stack_injective: bool,
    /// Two distinct stacks with the same output vector, if any.
    pub counterexample: Option<(Vec<usize>, Vec<usize>, Vec<f64>)>,
    /// Configurations whose output has a coordinate outside `{0, 1}`.
    pub non_binary: usize,
}

/// Enumerates every stack of depth `0..=d_max` over `k` symbols, drives it
/// with Cantor-depth PUSH signals and checks whether the bit-decode heads
/// separate the stacks.
pub fn check_bit_decode_injectivity(
    k: usize,
    d_max: usize,
    weights: BitWeights,
) -> Result<InjectivityReport> {
    let delta = 1.0;
    let eps = delta / 4.0;
    let codes: Vec<f64> = (0..=d_max)
        .flat_map(|d| (0..=k).map(move |i| cantor_code(i, d, k, d_max, delta)))
        .collect();
    let lowest = codes.iter().copied().fold(f64::INFINITY, f64::min);
    let highest = cantor_code(0, 0, k, d_max, delta) + delta;
    let origin = lowest - 3.0 * delta;
    let side = ((highest - origin) / delta).ceil() as usize + 1;
    let grid = HalfPlaneGrid::new(side, delta, origin)?;
    let measures = bit_decode_measures(&grid, &codes, weights)?;

    let mut stacks: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier = stacks.clone();
    for _ in 0..d_max {
        frontier = frontier
            .iter()
            .flat_map(|s| {
                (1..=k).map(move |i| {
                    let mut t = s.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
        stacks.extend(frontier.iter().cloned());
    }

    let mut seen: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    let mut by_top: HashMap<Vec<u64>, Option<(usize, usize)>> = HashMap::new();
    let mut report = InjectivityReport {
        weights,
        k,
        d_max,
        heads: measures.len(),
        configurations: stacks.len(),
        distinct_outputs: 0,
        top_injective: true,
        stack_injective: true,
        counterexample: None,
        non_binary: 0,
    };
    for stack in &stacks {
        let u = cantor_stack_signal(stack, k, d_max, delta, eps);
        let rm = ReducedMemory::from_samples(&u);
        let out: Vec<f64> = measures
            .iter()
            .map(|m| pal_eval_staircase(m, &rm))
            .collect();
        if out.iter().any(|&o| o != 0.0 && o != 1.0) {
            report.non_binary += 1;
        }
        let key: Vec<u64> = out.iter().map(|o| o.to_bits()).collect();
        let top = stack.last().map(|&i| (i, stack.len()));
        match by_top.get(&key) {
            Some(t) if *t != top => report.top_injective = false,
            _ => {
                by_top.insert(key.clone(), top);
            }
        }
        match seen.get(&key) {
            Some(other) => {
                report.stack_injective = false;
                if report.counterexample.is_none() {
                    report.counterexample = Some((other.clone(), stack.clone(), out));
                }
            }
            None => {
                seen.insert(key, stack.clone());
            }
        }
    }
    report.distinct_outputs = seen.len();
    Ok(report)
}
