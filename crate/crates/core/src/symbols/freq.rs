//! Frequency vectors on a fixed-point grid.
//!
//! Frequencies are stored as integer multiples of 2⁻⁴⁰ so that sums of
//! frequencies collide exactly and can be used as hash keys.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use smallvec::SmallVec;

use super::SymbolError;

/// Number of fractional bits of the fixed-point representation.
pub const FREQ_BITS: i32 = 40;
const SCALE: f64 = (1u64 << FREQ_BITS) as f64;
/// Largest admissible component magnitude; keeps conversions exact.
pub const FREQ_LIMIT: f64 = 8192.0;

/// A frequency θ ∈ ℝᵈ quantized to resolution 2⁻⁴⁰.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frequency(SmallVec<[i64; 4]>);

impl Frequency {
    pub fn zero(d: usize) -> Self {
        Frequency(SmallVec::from_elem(0, d))
    }

    /// Quantizes a real vector. Fails on non-finite or oversized components.
    pub fn new(components: &[f64]) -> Result<Self, SymbolError> {
        let mut q = SmallVec::with_capacity(components.len());
        for &c in components {
            if !c.is_finite() || c.abs() >= FREQ_LIMIT {
                return Err(SymbolError::InvalidFrequency(components.to_vec()));
            }
            q.push((c * SCALE).round() as i64);
        }
        Ok(Frequency(q))
    }

    /// Quantizes a vector known to be valid; panics otherwise.
    pub fn from_f64(components: &[f64]) -> Self {
        Self::new(components).expect("frequency component out of range")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&q| q == 0)
    }

    pub fn component(&self, j: usize) -> f64 {
        self.0[j] as f64 / SCALE
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().map(|&q| q as f64 / SCALE).collect()
    }

    /// Euclidean length.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&q| {
                let x = q as f64 / SCALE;
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Raw fixed-point components.
    pub fn raw(&self) -> &[i64] {
        &self.0
    }
}

impl Add for &Frequency {
    type Output = Frequency;
    fn add(self, rhs: &Frequency) -> Frequency {
        debug_assert_eq!(self.dim(), rhs.dim());
        Frequency(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Frequency {
    type Output = Frequency;
    fn sub(self, rhs: &Frequency) -> Frequency {
        debug_assert_eq!(self.dim(), rhs.dim());
        Frequency(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Frequency {
    type Output = Frequency;
    fn neg(self) -> Frequency {
        Frequency(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Debug for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_vec())
    }
}

/// The weight ⟨ξ⟩ = 1 + |ξ|.
pub fn weight(xi: &[f64]) -> f64 {
    1.0 + norm(xi)
}

/// The group weight ⟨θ⟩ = 1 + |θ|.
pub fn freq_weight(theta: &Frequency) -> f64 {
    1.0 + theta.norm()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        assert_eq!(weight(&[0.0, 0.0]), 1.0);
        assert_eq!(freq_weight(&Frequency::from_f64(&[1.0, 0.0])), 2.0);
        assert_eq!(weight(&[3.0, 4.0]), 6.0);
    }

    #[test]
    fn sums_collide_exactly() {
        let a = Frequency::from_f64(&[0.1, 0.7]);
        let b = Frequency::from_f64(&[0.2, -0.3]);
        let c = &a + &b;
        assert_eq!(&c - &b, a);
        assert_eq!(&(&a + &(-&a)), &Frequency::zero(2));
        let two_pi = std::f64::consts::TAU;
        let t = Frequency::from_f64(&[two_pi, 0.0]);
        assert!((t.component(0) - two_pi).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_components() {
        assert!(Frequency::new(&[f64::NAN]).is_err());
        assert!(Frequency::new(&[1e6]).is_err());
    }
}
