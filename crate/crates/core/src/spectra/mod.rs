//! Periodic Floquet engine: fiber matrices, bands, density of states and
//! band overlap.

pub mod analysis;
pub mod bands;
pub mod fiber;
pub mod lattice;

pub use analysis::{bracket_check, bs_scan, ids, overlap_zeta, BracketReport, BsScan, Interval, Overlap};
pub use bands::{band_table, trusted_window, BandTable, KGrid};
pub use fiber::{assemble_fiber, assemble_on, hermitian_eigenvalues, FiberMatrix, PeriodicModel};
pub use lattice::{DualPoint, Lattice};

use thiserror::Error;

use crate::symbols::SymbolError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("lattice basis is singular")]
    SingularLattice,
    #[error("frequency {0:?} is not on the dual lattice")]
    OffLattice(Vec<f64>),
    #[error("interval [{lo}, {hi}] leaves the trusted window [-{window}, {window}]")]
    UntrustedWindow { lo: f64, hi: f64, window: f64 },
    #[error("band tables are not comparable: {0}")]
    GridMismatch(String),
    #[error("invalid k-grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}
