//! Two-stack pushdown automata simulated on exact hysteresis channels.
//!
//! Each stack lives in the corner list of a rational reduced memory, encoded
//! by nested intervals. A list-stack interpreter serves as the oracle.

mod coder;
mod reference;
mod sim;
mod spec;

pub use coder::{Channel, Interval, NestedIntervalCoder};
pub use reference::{accepts, pda_step_reference, run_reference, PdaConfig, ReferenceRun, Step};
pub use sim::{
    autoregressive_run, check_against_reference, vpal_run, SimConfig, SimTrace, StepRecord,
    TransitionNet,
};
pub use spec::{
    anbncn_machine, bracket_machine, Action, CompiledPda, IndexOp, PdaSpec, StackOp, Transition,
};
