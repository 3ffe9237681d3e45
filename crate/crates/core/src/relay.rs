//! The elementary two-threshold relay and its full-replay oracle.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Activation threshold `alpha` and deactivation threshold `beta`, `alpha >= beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayThresholds<T = f64> {
    alpha: T,
    beta: T,
}

impl<T: Scalar> RelayThresholds<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if alpha < beta {
            return Err(Error::InvalidThresholds {
                alpha: alpha.to_f64(),
                beta: beta.to_f64(),
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &T {
        &self.alpha
    }

    pub fn beta(&self) -> &T {
        &self.beta
    }
}

/// Binary relay output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RelayState {
    /// Negative saturation; every relay starts here.
    #[default]
    Off,
    On,
}

impl RelayState {
    pub fn is_on(self) -> bool {
        self == RelayState::On
    }

    pub fn bit(self) -> u8 {
        self.is_on() as u8
    }

    pub fn from_bool(on: bool) -> Self {
        if on {
            RelayState::On
        } else {
            RelayState::Off
        }
    }
}

/// One step of the relay: on at or above `alpha`, off at or below `beta`,
/// unchanged inside the dead band. The `alpha` branch is checked first, so a
/// degenerate relay with `alpha == beta == u` switches on.
pub fn relay_step<T: Scalar>(prev: RelayState, u: &T, th: &RelayThresholds<T>) -> RelayState {
    if *u >= th.alpha {
        RelayState::On
    } else if *u <= th.beta {
        RelayState::Off
    } else {
        prev
    }
}

/// Folds [`relay_step`] over the whole sequence. This is the ground truth for
/// every fast read in the crate.
pub fn relay_replay<T: Scalar>(
    u: &[T],
    th: &RelayThresholds<T>,
    initial: RelayState,
) -> RelayState {
    u.iter().fold(initial, |s, x| relay_step(s, x, th))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(a: f64, b: f64) -> RelayThresholds {
        RelayThresholds::new(a, b).unwrap()
    }

    #[test]
    fn step_branches() {
        assert_eq!(
            relay_step(RelayState::Off, &2.0, &th(1.0, -1.0)),
            RelayState::On
        );
        assert_eq!(
            relay_step(RelayState::On, &0.0, &th(1.0, -1.0)),
            RelayState::On
        );
        assert_eq!(
            relay_step(RelayState::On, &-2.0, &th(1.0, -1.0)),
            RelayState::Off
        );
    }

    #[test]
    fn degenerate_relay_prefers_on() {
        assert_eq!(
            relay_step(RelayState::Off, &0.5, &th(0.5, 0.5)),
            RelayState::On
        );
    }

    #[test]
    fn rejects_inverted_thresholds() {
        assert!(matches!(
            RelayThresholds::new(-1.0, 1.0),
            Err(Error::InvalidThresholds { .. })
        ));
    }

    #[test]
    fn replay_examples() {
        let t = th(1.0, -1.0);
        assert_eq!(
            relay_replay(&[0.0, 2.0, 0.0, -2.0], &t, RelayState::Off),
            RelayState::Off
        );
        assert_eq!(
            relay_replay(&[0.0, 2.0, 0.0], &t, RelayState::Off),
            RelayState::On
        );
        // 0 -> off, 3 -> off (3 < 3.5), 1 -> off, 2, 0.5 (<= 0.7) -> off, 4 -> on
        let t = th(3.5, 0.7);
        assert_eq!(
            relay_replay(&[0.0, 3.0, 1.0, 2.0, 0.5, 4.0], &t, RelayState::Off),
            RelayState::On
        );
    }
}
