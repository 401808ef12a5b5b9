//! Resonance geometry: annuli 𝒜_j, resonant zones 𝒵_j, non-resonant sets
//! 𝒢_j, crossing volumes, good points and counting certificates.

pub mod certificate;
pub mod config;
pub mod diagnostics;
pub mod montecarlo;

pub use certificate::{counting_certificate, find_good_point, overlap_exponent, CountingCertificate, GoodPoint};
pub use config::{n_count, region_membership, FrequencySpec, Membership, RadialTerm, Region, ResonanceGeometryConfig};
pub use diagnostics::{freq_diagnostics, FreqDiagnostics};
pub use montecarlo::{crossing_volume, mc_volume, VolumeEstimate};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("membership is undefined at xi = 0")]
    ZeroVector,
    #[error("g_{0} is not radially increasing on the sampled shell")]
    RadialBracketFailure(usize),
    #[error("no good point after {iters} iterations ({in_g} samples in G, {failed_count} failed the count test, {failed_angle} failed the angle test)")]
    NotFound {
        iters: usize,
        in_g: usize,
        failed_count: usize,
        failed_angle: usize,
    },
    #[error("frequency sumset exceeds the budget of {0} elements")]
    CombinatorialBudgetExceeded(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spectra(#[from] crate::spectra::SpectraError),
}
