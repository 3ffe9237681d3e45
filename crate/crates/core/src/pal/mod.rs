//! Discretised Preisach attention: measures on the half-plane grid, the three
//! evaluation paths, multi-head layers, the bit-decoding heads and the
//! fixed-weight transformer block.

mod bitdecode;
mod eval;
mod grid;
mod mpal;
mod transformer;

pub use bitdecode::{
    bit_decode_measures, cantor_code, cantor_stack_signal, check_bit_decode_injectivity,
    decode_top, head_count, BitWeights, InjectivityReport,
};
pub use eval::{pal_eval_incremental, pal_eval_naive, pal_eval_staircase, IncrementalPal};
pub use grid::{read_measure_csv, write_measure_csv, HalfPlaneGrid, TriangularMeasure};
pub use mpal::{mpal_forward, HeadConfig, MpalState};
pub use transformer::{
    positional_encoding, HeadSpec, LayerConfig, LayerNorm, LnConfig, Mlp, PalTransformerLayer,
    PeConfig, TransformerTrace,
};
