//! Quasi-periodic matrix-valued symbol calculus with gauge transforms,
//! Dirac constructions, a periodic spectral engine and resonance geometry.

pub mod cli;
pub mod clifford;
pub mod gauge;
pub mod geometry;
pub mod numeric;
pub mod spectra;
pub mod symbols;
