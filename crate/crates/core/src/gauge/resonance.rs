//! Resonance cut-offs and the commutator-equation solver.

use serde::{Deserialize, Serialize};

use super::GaugeError;
use crate::symbols::expr::{MaskedQuotient, ResonanceMask, ResonancePart};
use crate::symbols::{Coeff, EvalContext, Frequency, MatrixSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Symmetrization {
    MaxWeight,
    MinWeight,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ResonanceVariant {
    /// |a_j(θ+ξ) − a_k(ξ)| > s·W^δ.
    Scalar,
    /// Coupling pairs are non-resonant outside {min(⟨ξ⟩,⟨θ+ξ⟩) ≤ s′}; every
    /// other entry is resonant. `pairs = None` couples all j ≠ k.
    SystemOneStep {
        s_prime: f64,
        pairs: Option<Vec<(usize, usize)>>,
    },
    /// All j ≠ k couple; diagonal entries are resonant.
    SystemFull { s_prime: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSpec {
    pub delta: f64,
    pub s: f64,
    pub symmetrization: Symmetrization,
    pub variant: ResonanceVariant,
}

impl ResonanceSpec {
    /// Scalar variant with the symmetrization chosen from the sign of δ.
    pub fn scalar(delta: f64, s: f64) -> Self {
        ResonanceSpec {
            delta,
            s,
            symmetrization: if delta >= 0.0 {
                Symmetrization::MaxWeight
            } else {
                Symmetrization::MinWeight
            },
            variant: ResonanceVariant::Scalar,
        }
    }

    pub fn with_variant(mut self, variant: ResonanceVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<(), GaugeError> {
        if !(self.s > 0.0) || !self.delta.is_finite() {
            return Err(GaugeError::InvalidSpec(format!("s = {}, delta = {}", self.s, self.delta)));
        }
        match &self.variant {
            ResonanceVariant::Scalar => Ok(()),
            ResonanceVariant::SystemOneStep { s_prime, .. } | ResonanceVariant::SystemFull { s_prime } => {
                if *s_prime >= 1.0 {
                    Ok(())
                } else {
                    Err(GaugeError::InvalidSpec(format!("s' = {s_prime} < 1")))
                }
            }
        }
    }
}

/// The cut-off χ for entry (j,k), given a_j(θ+ξ), a_k(ξ) and the two weights.
#[allow(clippy::too_many_arguments)]
pub fn chi_entry(
    spec: &ResonanceSpec,
    a_j_shift: f64,
    a_k_here: f64,
    w_here: f64,
    w_shift: f64,
    theta_zero: bool,
    j: usize,
    k: usize,
) -> bool {
    match &spec.variant {
        ResonanceVariant::Scalar => {
            if theta_zero && j == k {
                return false;
            }
            let w = match spec.symmetrization {
                Symmetrization::MaxWeight => w_here.max(w_shift),
                Symmetrization::MinWeight => w_here.min(w_shift),
            };
            (a_j_shift - a_k_here).abs() > spec.s * w.powf(spec.delta)
        }
        ResonanceVariant::SystemOneStep { s_prime, pairs } => {
            if j == k {
                return false;
            }
            if let Some(p) = pairs {
                if !p.contains(&(j, k)) {
                    return false;
                }
            }
            w_here.min(w_shift) > *s_prime
        }
        ResonanceVariant::SystemFull { s_prime } => j != k && w_here.min(w_shift) > *s_prime,
    }
}

/// The θ = 0 coefficient of a diagonal symbol, after checking its shape.
pub fn diagonal_coeff(a_d: &MatrixSymbol) -> Result<Coeff, GaugeError> {
    let zero = Frequency::zero(a_d.dim());
    for (t, _) in a_d.entries() {
        if *t != zero {
            return Err(GaugeError::NotDiagonal(format!("frequency {t:?} present")));
        }
    }
    Ok(a_d.coeff(&zero).cloned().unwrap_or_else(Coeff::zero))
}

fn check_diag_value(v: &crate::symbols::Value, m: usize) -> Result<(), GaugeError> {
    for j in 0..m {
        for k in 0..m {
            if j != k && v.entry(j, k).norm() > 0.0 {
                return Err(GaugeError::NotDiagonal(format!("entry ({j},{k}) nonzero")));
            }
        }
    }
    Ok(())
}

/// χ_θ(ξ) for entry (j,k) of the cut-off generated by a^D.
pub fn resonance_cutoff(
    a_d: &MatrixSymbol,
    theta: &Frequency,
    j: usize,
    k: usize,
    xi: &[f64],
    spec: &ResonanceSpec,
) -> Result<bool, GaugeError> {
    let diag = diagonal_coeff(a_d)?;
    let m = a_d.spinor_dim();
    let mut ctx = EvalContext::new(xi);
    let zero = Frequency::zero(a_d.dim());
    let here = ctx.eval(&diag, &zero)?;
    let there = ctx.eval(&diag, theta)?;
    check_diag_value(&here, m)?;
    check_diag_value(&there, m)?;
    let w_here = crate::symbols::weight(xi);
    let shifted: Vec<f64> = xi.iter().enumerate().map(|(i, x)| x + theta.component(i)).collect();
    let w_shift = crate::symbols::weight(&shifted);
    Ok(chi_entry(
        spec,
        there.diag_real(m)[j],
        here.diag_real(m)[k],
        w_here,
        w_shift,
        theta.is_zero(),
        j,
        k,
    ))
}

/// (b^NR, b^R) of the off-diagonal part of `b`.
pub fn split_resonant(
    b: &MatrixSymbol,
    a_d: &MatrixSymbol,
    spec: &ResonanceSpec,
) -> Result<(MatrixSymbol, MatrixSymbol), GaugeError> {
    let diag = diagonal_coeff(a_d)?;
    let (_, od) = b.split_diagonal();
    let mk = |keep: ResonancePart| {
        od.map_coeffs(|t, c| {
            Coeff::resonance(ResonanceMask {
                keep,
                inner: c.clone(),
                diag: diag.clone(),
                shift: t.clone(),
                spec: spec.clone(),
                dim: b.spinor_dim(),
            })
        })
    };
    Ok((mk(ResonancePart::NonResonant), mk(ResonancePart::Resonant)))
}

/// ψ_θ(ξ)_{jk} = i·b_θ(ξ)_{jk}·χ / (a_j(θ+ξ) − a_k(ξ)) for the off-diagonal part of `b`.
pub fn build_psi(a_d: &MatrixSymbol, b: &MatrixSymbol, spec: &ResonanceSpec) -> Result<MatrixSymbol, GaugeError> {
    spec.validate()?;
    let diag = diagonal_coeff(a_d)?;
    let (_, od) = b.split_diagonal();
    let mut psi = od.map_coeffs(|t, c| {
        Coeff::quotient(MaskedQuotient {
            numerator: c.clone(),
            diag: diag.clone(),
            shift: t.clone(),
            spec: spec.clone(),
            dim: b.spinor_dim(),
        })
    });
    psi.order = b.order - spec.delta;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::C64;

    fn f(v: &[f64]) -> Frequency {
        Frequency::from_f64(v)
    }

    fn jap_sq() -> MatrixSymbol {
        MatrixSymbol::principal(2, 1, Coeff::jap(2.0))
    }

    #[test]
    fn cutoff_examples() {
        let spec = ResonanceSpec::scalar(0.0, 1.0);
        assert!(resonance_cutoff(&jap_sq(), &f(&[1.0, 0.0]), 0, 0, &[2.0, 0.0], &spec).unwrap());
        assert!(!resonance_cutoff(&jap_sq(), &f(&[0.0, 0.0]), 0, 0, &[5.0, 1.0], &spec).unwrap());
        let sys = spec.with_variant(ResonanceVariant::SystemOneStep { s_prime: 5.0, pairs: None });
        let a = MatrixSymbol::principal(2, 2, Coeff::jap(1.0));
        assert!(!resonance_cutoff(&a, &f(&[1.0, 0.0]), 0, 1, &[1.0, 0.0], &sys).unwrap());
    }

    #[test]
    fn psi_example() {
        let b = MatrixSymbol::zero(2, 1).with_entry(f(&[1.0, 0.0]), Coeff::one());
        let psi = build_psi(&jap_sq(), &b, &ResonanceSpec::scalar(0.0, 1.0)).unwrap();
        let v = psi.eval(&f(&[1.0, 0.0]), &[2.0, 0.0]).unwrap()[(0, 0)];
        assert!((v - C64::new(0.0, 1.0 / 7.0)).norm() < 1e-15);
    }

    #[test]
    fn not_diagonal_rejected() {
        let a = MatrixSymbol::zero(2, 1).with_entry(f(&[1.0, 0.0]), Coeff::one());
        let spec = ResonanceSpec::scalar(0.0, 1.0);
        assert!(matches!(
            resonance_cutoff(&a, &f(&[1.0, 0.0]), 0, 0, &[0.0, 0.0], &spec),
            Err(GaugeError::NotDiagonal(_))
        ));
    }
}
