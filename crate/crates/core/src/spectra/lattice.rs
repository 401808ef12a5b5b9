//! Real lattices, their duals, and enumeration of dual points in a ball.

use nalgebra::DMatrix;

use super::SpectraError;
use crate::symbols::Frequency;

/// A lattice Λ = A·ℤ^d with basis vectors as the columns of A.
#[derive(Clone, Debug)]
pub struct Lattice {
    basis: DMatrix<f64>,
    dual: DMatrix<f64>,
    dual_inv: DMatrix<f64>,
}

/// A dual-lattice point with its integer coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint {
    pub coords: Vec<i64>,
    pub theta: Vec<f64>,
}

impl DualPoint {
    pub fn norm(&self) -> f64 {
        self.theta.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Lattice {
    /// `basis[i]` is the i-th basis vector.
    pub fn new(basis: &[Vec<f64>]) -> Result<Self, SpectraError> {
        let d = basis.len();
        if d == 0 || basis.iter().any(|v| v.len() != d) {
            return Err(SpectraError::SingularLattice);
        }
        let a = DMatrix::from_fn(d, d, |r, c| basis[c][r]);
        let inv = a.clone().try_inverse().ok_or(SpectraError::SingularLattice)?;
        let det = a.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(SpectraError::SingularLattice);
        }
        let dual = inv.transpose() * (2.0 * std::f64::consts::PI);
        let dual_inv = a.transpose() / (2.0 * std::f64::consts::PI);
        Ok(Lattice { basis: a, dual, dual_inv })
    }

    /// ℤ^d, whose dual is 2πℤ^d.
    pub fn integer(d: usize) -> Self {
        let basis: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Lattice::new(&basis).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Volume of a fundamental cell of Λ.
    pub fn cell_volume(&self) -> f64 {
        self.basis.determinant().abs()
    }

    /// Volume of a fundamental cell of Λ†.
    pub fn dual_cell_volume(&self) -> f64 {
        self.dual.determinant().abs()
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Columns are the dual basis vectors, 2π·A^{−T}.
    pub fn dual_matrix(&self) -> &DMatrix<f64> {
        &self.dual
    }

    pub fn dual_point(&self, coords: &[i64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.dual[(r, c)] * coords[c] as f64).sum())
            .collect()
    }

    /// Real coordinates of θ in the dual basis.
    pub fn dual_coords(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.dual_inv[(r, c)] * theta[c]).sum())
            .collect()
    }

    /// Integer coordinates of θ when it lies on Λ† within `tol` per coordinate.
    pub fn snap(&self, theta: &[f64], tol: f64) -> Option<Vec<i64>> {
        let x = self.dual_coords(theta);
        let n: Vec<i64> = x.iter().map(|v| v.round() as i64).collect();
        if x.iter().zip(&n).all(|(v, k)| (v - *k as f64).abs() <= tol) {
            Some(n)
        } else {
            None
        }
    }

    /// Dual points with |θ| ≤ r, ordered by |θ| and then lexicographically.
    pub fn enumerate_dual(&self, r: f64) -> Vec<DualPoint> {
        let d = self.dim();
        // |n_i| ≤ |row_i(B⁻¹)|·|θ|
        let bounds: Vec<i64> = (0..d)
            .map(|i| {
                let row: f64 = (0..d).map(|c| self.dual_inv[(i, c)].powi(2)).sum::<f64>().sqrt();
                (row * r).floor() as i64 + 1
            })
            .collect();
        let limit = r * (1.0 + 1e-12);
        let mut out = Vec::new();
        let mut n: Vec<i64> = bounds.iter().map(|b| -b).collect();
        loop {
            let theta = self.dual_point(&n);
            let p = DualPoint { coords: n.clone(), theta };
            if p.norm() <= limit {
                out.push(p);
            }
            let mut i = 0;
            loop {
                if i == d {
                    out.sort_by(|a, b| {
                        a.norm().total_cmp(&b.norm()).then_with(|| {
                            a.theta
                                .iter()
                                .zip(&b.theta)
                                .map(|(x, y)| x.total_cmp(y))
                                .find(|o| o.is_ne())
                                .unwrap_or(std::cmp::Ordering::Equal)
                        })
                    });
                    return out;
                }
                n[i] += 1;
                if n[i] <= bounds[i] {
                    break;
                }
                n[i] = -bounds[i];
                i += 1;
            }
        }
    }

    /// Point of the fundamental cell with fractional coordinates `f`.
    pub fn cell_point(&self, f: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|r| (0..d).map(|c| self.dual[(r, c)] * f[c]).sum()).collect()
    }

    pub fn frequency(&self, coords: &[i64]) -> Frequency {
        Frequency::from_f64(&self.dual_point(coords))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lattice_ball() {
        let l = Lattice::integer(2);
        let pts = l.enumerate_dual(7.0);
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0].coords, vec![0, 0]);
        assert_eq!(l.enumerate_dual(1.0).len(), 1);
        assert!((l.dual_cell_volume() - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_lattice() {
        let l = Lattice::new(&[vec![1.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let pts = l.enumerate_dual(13.0);
        let tp = 2.0 * std::f64::consts::PI;
        let mut brute = 0;
        for a in -5i64..=5 {
            for b in -5i64..=5 {
                let (x, y) = (tp * a as f64, 2.0 * tp * b as f64);
                if (x * x + y * y).sqrt() <= 13.0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(pts.len(), brute);
        assert!(pts.iter().any(|p| (p.theta[1] - 2.0 * tp).abs() < 1e-12));
        assert!(Lattice::new(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
    }
}
