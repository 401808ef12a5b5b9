//! Periodic models and truncated fiber matrices A(k).

use nalgebra::DVector;
use rustc_hash::FxHashMap;

use super::lattice::{DualPoint, Lattice};
use super::SpectraError;
use crate::symbols::{CMat, EvalContext, Frequency, MatrixSymbol, C64};

#[derive(Clone, Debug)]
pub struct PeriodicModel {
    pub lattice: Lattice,
    pub symbol: MatrixSymbol,
    /// Principal constants a_j of a_j⟨ξ⟩^α, when known; they set the trusted window.
    pub exponents: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    /// Dual coordinates of every symbol frequency.
    coords: Vec<(Frequency, Vec<i64>)>,
}

impl PeriodicModel {
    pub fn new(lattice: Lattice, symbol: MatrixSymbol) -> Result<Self, SpectraError> {
        if lattice.dim() != symbol.dim() {
            return Err(SpectraError::Symbol(crate::symbols::SymbolError::DimensionMismatch {
                expected: format!("d={}", lattice.dim()),
                found: format!("d={}", symbol.dim()),
            }));
        }
        let mut coords = Vec::new();
        for t in symbol.frequencies() {
            let v = t.to_vec();
            let n = lattice.snap(&v, 1e-9).ok_or(SpectraError::OffLattice(v))?;
            coords.push((t, n));
        }
        Ok(PeriodicModel {
            lattice,
            symbol,
            exponents: None,
            alpha: None,
            coords,
        })
    }

    pub fn with_principal(mut self, exponents: Vec<f64>, alpha: f64) -> Self {
        self.exponents = Some(exponents);
        self.alpha = Some(alpha);
        self
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn spinor_dim(&self) -> usize {
        self.symbol.spinor_dim()
    }

    pub fn with_symbol(&self, symbol: MatrixSymbol) -> Result<Self, SpectraError> {
        let mut out = PeriodicModel::new(self.lattice.clone(), symbol)?;
        out.exponents = self.exponents.clone();
        out.alpha = self.alpha;
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct FiberMatrix {
    pub k: Vec<f64>,
    pub radius: f64,
    pub points: Vec<DualPoint>,
    pub m: usize,
    pub matrix: CMat,
}

impl FiberMatrix {
    /// Row/column of component j at the i-th dual point.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let ev: DVector<f64> = h.symmetric_eigenvalues();
    let mut v: Vec<f64> = ev.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Fiber of `symbol` on an explicit list of dual points:
/// block (θ′,θ) = b_{θ′−θ}(k+θ).
pub fn assemble_on(model: &PeriodicModel, k: &[f64], points: &[DualPoint]) -> Result<CMat, SpectraError> {
    let m = model.spinor_dim();
    let n = points.len();
    let lookup: FxHashMap<&[i64], usize> = points.iter().enumerate().map(|(i, p)| (p.coords.as_slice(), i)).collect();
    let mut out = CMat::zeros(n * m, n * m);
    let mut target = vec![0i64; model.dim()];
    for (col, p) in points.iter().enumerate() {
        let base: Vec<f64> = k.iter().zip(&p.theta).map(|(a, b)| a + b).collect();
        let mut ctx = EvalContext::new(&base);
        for (freq, shift) in &model.coords {
            for (t, (a, b)) in target.iter_mut().zip(p.coords.iter().zip(shift)) {
                *t = a + b;
            }
            let Some(&row) = lookup.get(target.as_slice()) else {
                continue;
            };
            let v = model.symbol.eval_in(&mut ctx, freq)?;
            if v.is_zero() {
                continue;
            }
            let block = v.to_matrix(m);
            out.view_mut((row * m, col * m), (m, m)).copy_from(&block);
        }
    }
    Ok(out)
}

pub fn assemble_fiber(model: &PeriodicModel, k: &[f64], radius: f64) -> Result<FiberMatrix, SpectraError> {
    let points = model.lattice.enumerate_dual(radius);
    let matrix = assemble_on(model, k, &points)?;
    Ok(FiberMatrix {
        k: k.to_vec(),
        radius,
        points,
        m: model.spinor_dim(),
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_generators, free_dirac_symbol};

    #[test]
    fn free_dirac_fiber() {
        let rep = build_generators(2).unwrap();
        let model = PeriodicModel::new(Lattice::integer(2), free_dirac_symbol(&rep, 0.0)).unwrap();
        let f = assemble_fiber(&model, &[0.3, 0.0], 1.0).unwrap();
        let ev = f.eigenvalues();
        assert!((ev[0] + 0.3).abs() < 1e-14 && (ev[1] - 0.3).abs() < 1e-14);
        let massive = PeriodicModel::new(Lattice::integer(2), free_dirac_symbol(&rep, 1.0)).unwrap();
        let ev = assemble_fiber(&massive, &[0.0, 0.0], 1.0).unwrap().eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let zero = PeriodicModel::new(Lattice::integer(2), MatrixSymbol::zero(2, 2)).unwrap();
        assert!(assemble_fiber(&zero, &[0.1, 0.2], 10.0).unwrap().matrix.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn off_lattice_rejected() {
        let s = MatrixSymbol::zero(2, 1).with_entry(Frequency::from_f64(&[1.0, 0.0]), crate::symbols::Coeff::one());
        assert!(matches!(PeriodicModel::new(Lattice::integer(2), s), Err(SpectraError::OffLattice(_))));
    }
}
