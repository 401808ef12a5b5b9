//! Gauge transforms: resonance cut-offs, the commutator-equation solver,
//! one-step and parallel weak transforms, and system uncoupling.

pub mod bounds;
pub mod report;
pub mod resonance;
pub mod system;
pub mod transform;

pub use bounds::{commutator_order_estimate, predicted_bound, BoundKind, OrderFit};
pub use report::{GaugeOptions, GaugeReport, LedgerEntry};
pub use resonance::{
    build_psi, resonance_cutoff, split_resonant, ResonanceSpec, ResonanceVariant, Symmetrization,
};
pub use system::{uncouple_system, UncoupleMode};
pub use transform::{default_series_order, gauge_conjugate, one_step_weak, parallel_transform, Conjugated};

use thiserror::Error;

use crate::symbols::SymbolError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("diagonal symbol expected: {0}")]
    NotDiagonal(String),
    #[error("invalid resonance spec: {0}")]
    InvalidSpec(String),
    #[error("principal exponents not pairwise distinct: {0}")]
    DegenerateSeparation(String),
    #[error("radii must span at least 1.5 decades")]
    InsufficientRadii,
    #[error("no admissible s' found below {0}")]
    SeparationRadiusNotFound(f64),
}
