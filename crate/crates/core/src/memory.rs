//! Reduced memory: the alternating dominant-extrema list with Madelung wiping.
//!
//! The corner list `e_1..e_r` always ends with the current input. Along the
//! list, maxima strictly decrease and minima strictly increase, so every relay
//! state can be read back by two binary searches.
//!
//! Wiping may discard the global extrema (`1, -2, 1` leaves `[1]`), so the
//! memory also carries the running min/max envelope of the history.

use crate::error::{Error, Result};
use crate::relay::{RelayState, RelayThresholds};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    None,
    Rising,
    Falling,
}

/// Push/pop tallies over the corner list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounter {
    pub pushes: u64,
    pub pops: u64,
    pub updates: u64,
}

impl OpCounter {
    /// Every corner is pushed once and popped at most once.
    pub fn within_amortised_bound(&self) -> bool {
        self.pushes + self.pops <= 2 * self.updates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMemory<T = f64> {
    corners: Vec<T>,
    // Sample index at which each corner took its current value.
    positions: Vec<usize>,
    direction: Direction,
    ops: OpCounter,
    // Running (min, max) of every sample seen.
    envelope: Option<(T, T)>,
}

impl<T: Scalar> Default for ReducedMemory<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ReducedMemory<T> {
    pub fn new() -> Self {
        Self {
            corners: Vec::new(),
            positions: Vec::new(),
            direction: Direction::None,
            ops: OpCounter::default(),
            envelope: None,
        }
    }

    pub fn from_samples<'a, I>(samples: I) -> Self
    where
        I: IntoIterator<Item = &'a T>,
    {
        let mut rm = Self::new();
        for u in samples {
            rm.update(u.clone());
        }
        rm
    }

    pub fn corners(&self) -> &[T] {
        &self.corners
    }

    /// Sample index (0-based, counting update calls) of each corner.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn ops(&self) -> OpCounter {
        self.ops
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn last(&self) -> Option<&T> {
        self.corners.last()
    }

    /// Feeds one sample.
    pub fn update(&mut self, u: T) {
        let step = self.ops.updates as usize;
        self.ops.updates += 1;
        self.envelope = match self.envelope.take() {
            None => Some((u.clone(), u.clone())),
            Some((lo, hi)) => {
                let lo = if u < lo { u.clone() } else { lo };
                let hi = if u > hi { u.clone() } else { hi };
                Some((lo, hi))
            }
        };
        let Some(last) = self.corners.last() else {
            self.push(u, step);
            return;
        };
        if u == *last {
            // plateau: a time reparameterisation, nothing to record
            return;
        }
        let dir = if u > *last {
            Direction::Rising
        } else {
            Direction::Falling
        };
        if dir == self.direction {
            let n = self.corners.len();
            self.corners[n - 1] = u;
            self.positions[n - 1] = step;
        } else {
            self.direction = dir;
            self.push(u, step);
        }
        self.wipe();
    }

    fn push(&mut self, u: T, step: usize) {
        self.corners.push(u);
        self.positions.push(step);
        self.ops.pushes += 1;
    }

    fn wipe(&mut self) {
        loop {
            let n = self.corners.len();
            if n < 3 {
                return;
            }
            let u = &self.corners[n - 1];
            let third = &self.corners[n - 3];
            let dominated = match self.direction {
                Direction::Rising => u >= third,
                Direction::Falling => u <= third,
                Direction::None => false,
            };
            if !dominated {
                return;
            }
            if n == 3 && self.direction == Direction::Falling && self.corners[0] < self.corners[1] {
                // A leading minimum only repeats the initial all-off state, so
                // falling through it drops it alone and keeps the maximum.
                self.corners.remove(0);
                self.positions.remove(0);
                self.ops.pops += 1;
                return;
            }
            self.corners.drain(n - 3..n - 1);
            self.positions.drain(n - 3..n - 1);
            self.ops.pops += 2;
        }
    }

    /// Relay state after the history summarised by this memory, in
    /// `O(log r)` comparisons.
    pub fn relay_read(&self, th: &RelayThresholds<T>) -> RelayState {
        let on = self.last_index_where(|c| c >= th.alpha(), true);
        let off = self.last_index_where(|c| c <= th.beta(), false);
        match (on, off) {
            (Some(a), Some(b)) => RelayState::from_bool(a >= b),
            (Some(_), None) => RelayState::On,
            _ => RelayState::Off,
        }
    }

    /// Last corner index satisfying `pred`, where `pred` is monotone along
    /// each of the two interleaved subsequences. `upper` selects the
    /// predicate family: `c >= alpha` holds on a prefix of the maxima and a
    /// suffix of the minima; `c <= beta` the other way round.
    fn last_index_where(&self, pred: impl Fn(&T) -> bool, upper: bool) -> Option<usize> {
        let r = self.corners.len();
        match r {
            0 => return None,
            1 => return pred(&self.corners[0]).then_some(0),
            _ => {}
        }
        // Parity of the maxima in the corner list.
        let max_parity = if self.corners[1] > self.corners[0] {
            1
        } else {
            0
        };
        let min_parity = 1 - max_parity;
        let (prefix_parity, suffix_parity) = if upper {
            (max_parity, min_parity)
        } else {
            (min_parity, max_parity)
        };
        // Prefix family: count how many leading members satisfy the predicate.
        let prefix_len = (r - prefix_parity).div_ceil(2);
        let k = partition_point(prefix_len, |m| pred(&self.corners[prefix_parity + 2 * m]));
        let from_prefix = (k > 0).then(|| prefix_parity + 2 * (k - 1));
        // Suffix family: if any member satisfies it, the last one does.
        let suffix_len = (r - suffix_parity).div_ceil(2);
        let from_suffix = (suffix_len > 0)
            .then(|| suffix_parity + 2 * (suffix_len - 1))
            .filter(|&i| pred(&self.corners[i]));
        from_prefix.max(from_suffix)
    }

    /// Running `(min, max)` of the history.
    pub fn envelope(&self) -> Option<(&T, &T)> {
        self.envelope.as_ref().map(|(lo, hi)| (lo, hi))
    }

    /// Historical range `max(u) - min(u)` in O(1).
    pub fn range(&self) -> Result<T> {
        let (lo, hi) = self.envelope().ok_or(Error::EmptyMemory)?;
        Ok(hi.clone() - lo.clone())
    }

    /// Checks the alternation and nesting invariants. Used by tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let c = &self.corners;
        for w in c.windows(3) {
            let up1 = w[1] > w[0];
            let up2 = w[2] > w[1];
            if up1 == up2 {
                return Err(format!("alternation broken at {w:?}"));
            }
            // Nesting: the newer excursion stays strictly inside the older one.
            let inside = if up2 { w[2] < w[0] } else { w[2] > w[0] };
            if !inside {
                return Err(format!("nesting broken at {w:?}"));
            }
        }
        if c.windows(2).any(|w| w[0] == w[1]) {
            return Err("repeated corner".into());
        }
        if let (Some(last), Some(prev)) = (c.last(), c.len().checked_sub(2).map(|i| &c[i])) {
            let expected = if last > prev {
                Direction::Rising
            } else {
                Direction::Falling
            };
            if self.direction != expected {
                return Err("direction out of sync".into());
            }
        }
        if !self.ops.within_amortised_bound() {
            return Err(format!("amortised bound violated: {:?}", self.ops));
        }
        Ok(())
    }
}

/// First index in `0..n` at which `pred` turns false, for a predicate that is
/// true on a prefix.
fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}
