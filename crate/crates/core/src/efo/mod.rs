//! Extremum first-order logic over input histories.
//!
//! Grammar (precedence low to high: `|`, `&`, `+ -`, prefix):
//!
//! ```text
//! expr    := expr '|' expr | expr '&' expr | expr ('+' | '-') expr
//!          | '!' expr | ('exists' | 'forall') '^ext' var '.' expr
//!          | '(' expr ')' | 'true' | 'false'
//!          | 'u[' var ']' ('>=' | '<=') (number | 'u[' var ']')
//!          | var '<ext' var
//!          | 'extagg' var '[' affine ']' 'where' unary
//! affine  := signed sum of number, number '*' 'u[' var ']', 'u[' var ']'
//! ```
//!
//! Quantifier bodies extend as far right as possible. The `where` clause is a
//! single prefix-level formula; compound conditions need parentheses.

mod ast;
mod compile;
mod eval;
mod parser;

pub use ast::{Affine, CmpOp, Efo, EfoType, Operand};
pub use compile::{compile_extagg, Band, BandHead, ExtAggBank};
pub use eval::{
    eval, eval_bool, eval_real, eval_rectified, exists_via_threshold, extremal_positions, rect_and,
    rect_not, rect_or, relay_as_efo, relu, EfoValue,
};
pub use parser::{parse_efo, parse_efo_typed};
