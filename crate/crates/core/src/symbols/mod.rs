//! Quasi-periodic matrix-valued symbols and their algebra.

pub mod eval;
pub mod expr;
pub mod freq;
pub mod norm;
pub mod symbol;

pub use eval::{EvalContext, Value};
pub use expr::{Coeff, CMat, EntryPart, Node, C64};
pub use freq::{freq_weight, weight, Frequency};
pub use norm::{GridSpec, NormEstimate, NormMode};
pub use symbol::MatrixSymbol;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("invalid frequency vector {0:?}")]
    InvalidFrequency(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("cut-off is 1 but denominator vanishes at theta={theta:?}, xi={xi:?}, entry ({row},{col})")]
    MaskedDivisionOutsideSupport {
        theta: Vec<f64>,
        xi: Vec<f64>,
        row: usize,
        col: usize,
    },
    #[error("exact norm unavailable: {0}")]
    ExactModeUnavailable(String),
    #[error("expression cannot be serialized: {0}")]
    NotSerializable(String),
}
