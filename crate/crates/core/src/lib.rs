//! Exact relay hysteresis and the Preisach attention layer.
//!
//! The crate is organised bottom-up:
//!
//! * [`relay`] and [`memory`] hold the binary relay, the full-replay oracle and
//!   the reduced memory (extremum stack) with Madelung wiping.
//! * [`pal`] evaluates discretised Preisach measures over a reduced memory,
//!   multi-head layers and a fixed-weight transformer block.
//! * [`relax`] is the smooth relay recurrence with reverse-mode gradients.
//! * [`pda`] simulates two-stack pushdown automata on hysteresis channels.
//! * [`efo`] parses and evaluates extremum first-order logic.
//! * [`rfim`] holds the mean-field random-field Ising model experiments.
//! * [`bench`] is the scaling harness used by the CLI.
//!
//! Everything numeric that must be exact is generic over [`Scalar`], which is
//! implemented for `f64` and for arbitrary-precision rationals.

pub mod bench;
pub mod efo;
pub mod error;
pub mod io;
pub mod memory;
pub mod pal;
pub mod pda;
pub mod relax;
pub mod relay;
pub mod rfim;
pub mod scalar;

pub use error::{Error, Result};
pub use memory::{Direction, OpCounter, ReducedMemory};
pub use relay::{relay_replay, relay_step, RelayState, RelayThresholds};
pub use scalar::{Rational, Scalar};

/// Version of the on-disk schemas (layer config, PDA spec, trace records).
pub const SCHEMA_VERSION: u32 = 1;
