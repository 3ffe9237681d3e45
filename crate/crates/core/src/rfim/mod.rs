//! Mean-field random-field Ising model at zero temperature and the
//! streaming memory constructions built on extremum stacks.

mod critical;
mod equiv;
mod streams;
mod sweep;

pub use critical::{
    critical_disorder, critical_estimate, criticality_scan, max_jump, ScanPoint, SCAN_STEP,
};
pub use equiv::{preisach_equiv_check, ContinuumEnsemble, EquivReport, RelayEnsemble};
pub use streams::{hopfield_retrieve, hopfield_store, streaming_non_dominated_sum, PatternStore};
pub use sweep::{
    loop_schedule, return_point_check, rfim_sweep, sample_fields, sweep_system, Branch, RfimConfig,
    SpinSystem, SweepPoint, SweepResult,
};
