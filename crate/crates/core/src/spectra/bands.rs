//! Band tables over uniform quasimomentum grids.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fiber::{assemble_fiber, hermitian_eigenvalues, PeriodicModel};
use super::SpectraError;
use crate::symbols::norm::directions;
use crate::symbols::{Frequency, Value};

/// Monkhorst-type grid: fractional coordinates (i + offset)/n − ½ per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub n: Vec<usize>,
    #[serde(default = "half")]
    pub offset: f64,
}

fn half() -> f64 {
    0.5
}

impl KGrid {
    pub fn uniform(d: usize, n: usize) -> Self {
        KGrid { n: vec![n; d], offset: 0.5 }
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fractional coordinates in index order (first axis fastest).
    pub fn fractions(&self) -> Vec<Vec<f64>> {
        let total = self.len();
        (0..total)
            .map(|mut idx| {
                self.n
                    .iter()
                    .map(|&n| {
                        let i = idx % n;
                        idx /= n;
                        (i as f64 + self.offset) / n as f64 - 0.5
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct BandTable {
    pub grid: KGrid,
    pub radius: f64,
    pub ks: Vec<Vec<f64>>,
    /// Ascending eigenvalues of the truncated fiber at each k.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Eigenvalues in [−window, window] are trusted.
    pub window: f64,
    pub window_rule: String,
    /// |det Λ|, the volume of a cell of the direct lattice.
    pub cell_volume: f64,
}

/// Trusted half-width κ(R − reach)^α with κ = min|a_j|/2 when principal
/// constants are declared; otherwise half the smallest |eigenvalue| of the
/// Hermitian part of the θ = 0 coefficient over directions at |ξ| = R − reach.
pub fn trusted_window(model: &PeriodicModel, radius: f64) -> Result<(f64, String), SpectraError> {
    let reach = model.symbol.reach();
    let r = (radius - reach).max(0.0);
    if let (Some(a), Some(alpha)) = (&model.exponents, model.alpha) {
        let kappa = a.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min) / 2.0;
        return Ok((kappa * r.powf(alpha), format!("declared: {kappa}*(R-reach)^{alpha}")));
    }
    let d = model.dim();
    let m = model.spinor_dim();
    let zero = Frequency::zero(d);
    let mut worst = f64::INFINITY;
    for u in directions(d, if d == 2 { 64 } else { 128 }, 3) {
        let xi: Vec<f64> = u.iter().map(|c| c * r).collect();
        let v = model.symbol.eval(&zero, &xi).map(Value::Mat)?.to_matrix(m);
        let ev = hermitian_eigenvalues(&v);
        worst = worst.min(ev.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min));
    }
    Ok((0.5 * worst, "measured: half the smallest principal eigenvalue at R-reach".into()))
}

pub fn band_table(model: &PeriodicModel, grid: &KGrid, radius: f64) -> Result<BandTable, SpectraError> {
    if grid.n.len() != model.dim() || grid.n.iter().any(|&n| n == 0) {
        return Err(SpectraError::InvalidGrid(format!("{:?} for d={}", grid.n, model.dim())));
    }
    let ks: Vec<Vec<f64>> = grid.fractions().iter().map(|f| model.lattice.cell_point(f)).collect();
    let eigenvalues = ks
        .par_iter()
        .map(|k| assemble_fiber(model, k, radius).map(|f| f.eigenvalues()))
        .collect::<Result<Vec<_>, _>>()?;
    let (window, window_rule) = trusted_window(model, radius)?;
    Ok(BandTable {
        grid: grid.clone(),
        radius,
        ks,
        eigenvalues,
        window,
        window_rule,
        cell_volume: model.lattice.cell_volume(),
    })
}

impl BandTable {
    pub fn is_trusted(&self, x: f64) -> bool {
        x.abs() <= self.window
    }

    /// Band intervals [min_k λ_j(k), max_k λ_j(k)] over sorted ranks.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let n = self.eigenvalues.first().map_or(0, |v| v.len());
        (0..n)
            .map(|j| {
                self.eigenvalues.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), ev| {
                    (lo.min(ev[j]), hi.max(ev[j]))
                })
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let d = self.ks.first().map_or(0, |k| k.len());
        let mut s = String::from("kIndex");
        for i in 0..d {
            let _ = write!(s, ",k{}", i + 1);
        }
        s.push_str(",rank,value,trusted\n");
        for (ki, (k, ev)) in self.ks.iter().zip(&self.eigenvalues).enumerate() {
            for (rank, v) in ev.iter().enumerate() {
                let _ = write!(s, "{ki}");
                for c in k {
                    let _ = write!(s, ",{c:.16e}");
                }
                let _ = writeln!(s, ",{rank},{v:.16e},{}", self.is_trusted(*v));
            }
        }
        s
    }
}
