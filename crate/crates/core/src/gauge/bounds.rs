//! Closed-form right-hand sides of the norm estimates, and a sampled
//! order diagnostic for commutators.

use serde::Serialize;

use super::GaugeError;
use crate::numeric::loglog_slope;
use crate::symbols::norm::directions;
use crate::symbols::{EvalContext, MatrixSymbol};

#[derive(Clone, Debug, PartialEq)]
pub enum BoundKind {
    /// ⟦ψ⟧^{β−δ}_l ≤ (c_m/s)·⟦A^OD⟧^β_l with c_m = √m.
    Psi { s: f64, m: usize, od_norm: f64 },
    /// ⟦R⟧^{2β−δ}_l ≤ (3c_m/s)·x²·exp(2c_m x/s), x = ⟦A^OD⟧^β_{l+|β|+|β−δ|}.
    Remainder { s: f64, m: usize, od_norm: f64 },
    /// ⟦a∘b⟧^{α+β}_l ≤ ⟦a⟧^α_l·⟦b⟧^β_{l+|α|}.
    Product { a_norm: f64, b_norm: f64 },
    /// ⟦ad(A₀;A₁,…,A_k)⟧ ≤ 2^k·Π⟦A_j⟧ (norms taken at the shifted indices).
    Commutator { norms: Vec<f64> },
    /// ⟦ad^k(A;B)⟧^α_l ≤ 2^k·⟦A⟧^α_l·(⟦B⟧^0_{l+|α|})^k.
    ZeroOrderCommutator { k: u32, a_norm: f64, b_norm: f64 },
    /// ⟦e^{−iΨ}R̃e^{iΨ}⟧ ≤ ⟦R̃⟧·exp(2⟦Ψ⟧^0).
    Conjugated { norm: f64, psi_norm: f64 },
}

pub fn predicted_bound(kind: &BoundKind) -> f64 {
    match kind {
        BoundKind::Psi { s, m, od_norm } => (*m as f64).sqrt() / s * od_norm,
        BoundKind::Remainder { s, m, od_norm } => {
            let c = (*m as f64).sqrt() / s;
            3.0 * c * od_norm * od_norm * (2.0 * c * od_norm).exp()
        }
        BoundKind::Product { a_norm, b_norm } => a_norm * b_norm,
        BoundKind::Commutator { norms } => {
            let k = norms.len().saturating_sub(1) as i32;
            2f64.powi(k) * norms.iter().product::<f64>()
        }
        BoundKind::ZeroOrderCommutator { k, a_norm, b_norm } => {
            2f64.powi(*k as i32) * a_norm * b_norm.powi(*k as i32)
        }
        BoundKind::Conjugated { norm, psi_norm } => norm * (2.0 * psi_norm).exp(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderFit {
    /// Fitted exponent, or −∞ when every sampled magnitude vanishes.
    pub slope: f64,
    pub residual: f64,
}

/// Log-log slope of sup_dirs ‖ad(a,ψ)_θ(ξ)‖ against ⟨ξ⟩, maximized over θ.
pub fn commutator_order_estimate(
    a: &MatrixSymbol,
    psi: &MatrixSymbol,
    radii: &[f64],
) -> Result<OrderFit, GaugeError> {
    let lo = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().cloned().fold(0.0, f64::max);
    if radii.len() < 2 || !(lo > 0.0) || (hi / lo).log10() < 1.5 {
        return Err(GaugeError::InsufficientRadii);
    }
    let ad = a.ad(psi)?;
    sampled_order(&ad, radii)
}

/// Slope of the sampled coefficient magnitudes of `s`, maximized over θ.
pub fn sampled_order(s: &MatrixSymbol, radii: &[f64]) -> Result<OrderFit, GaugeError> {
    let d = s.dim();
    let dirs = directions(d, if d == 2 { 64 } else { 128 }, 7);
    let thetas = s.frequencies();
    let mut mags = vec![vec![0.0f64; radii.len()]; thetas.len()];
    for (ri, r) in radii.iter().enumerate() {
        for u in &dirs {
            let x: Vec<f64> = u.iter().map(|c| c * r).collect();
            let mut ctx = EvalContext::new(&x);
            for (ti, t) in thetas.iter().enumerate() {
                let v = s.eval_in(&mut ctx, t)?.op_norm();
                mags[ti][ri] = mags[ti][ri].max(v);
            }
        }
    }
    let weights: Vec<f64> = radii.iter().map(|r| 1.0 + r).collect();
    let mut best = OrderFit {
        slope: f64::NEG_INFINITY,
        residual: 0.0,
    };
    for row in &mags {
        if let Some((slope, residual)) = loglog_slope(&weights, row) {
            if slope > best.slope {
                best = OrderFit { slope, residual };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::logspace;
    use crate::symbols::{Coeff, Frequency};

    #[test]
    fn formula_examples() {
        assert_eq!(predicted_bound(&BoundKind::Psi { s: 2.0, m: 1, od_norm: 6.0 }), 3.0);
        let r = predicted_bound(&BoundKind::Remainder { s: 1.0, m: 1, od_norm: 1.0 });
        assert!((r - 3.0 * 1f64.exp().powi(2)).abs() < 1e-12);
        assert!((r - 22.17).abs() < 0.01);
        assert_eq!(predicted_bound(&BoundKind::Remainder { s: 1.0, m: 1, od_norm: 0.0 }), 0.0);
    }

    #[test]
    fn order_of_difference_of_squares() {
        let a = MatrixSymbol::principal(2, 1, Coeff::jap(2.0));
        let psi = MatrixSymbol::zero(2, 1).with_entry(Frequency::from_f64(&[1.0, 0.0]), Coeff::one());
        let fit = commutator_order_estimate(&a, &psi, &logspace(10.0, 1000.0, 8)).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.1, "slope {}", fit.slope);
        let zero = MatrixSymbol::zero(2, 1);
        assert_eq!(commutator_order_estimate(&a, &zero, &logspace(10.0, 1000.0, 8)).unwrap().slope, f64::NEG_INFINITY);
        assert!(commutator_order_estimate(&a, &psi, &[10.0, 20.0]).is_err());
    }
}
