//! The weighted symbol norms ⟦b⟧_l^γ = Σ_θ ⟨θ⟩^l sup_ξ ⟨ξ⟩^{−γ}‖b_θ(ξ)‖.
//!
//! Exact mode handles coefficients of the form K·⟨ξ⟩^q·|ξ|^p·1_{lo≤|ξ|<hi}
//! (and sums of such terms sharing the radial profile), whose supremum has a
//! closed form. Sampled mode takes a maximum over a radial × angular grid and
//! is therefore a lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{op_norm, EvalContext};
use super::expr::{Coeff, CMat, EntryPart, Node, C64};
use super::freq::{freq_weight, Frequency};
use super::symbol::MatrixSymbol;
use super::SymbolError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Linearly spaced radii in [0, 1).
    pub inner_radii: usize,
    /// Log-spaced radii in [r_min, r_max].
    pub radii: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub directions: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn default_for(d: usize) -> Self {
        GridSpec {
            inner_radii: 8,
            radii: 64,
            r_min: 1.0,
            r_max: 1e3,
            directions: if d <= 2 { 64 } else { 256 },
            seed: 0x5eed,
        }
    }

    pub fn coarse(d: usize) -> Self {
        GridSpec {
            inner_radii: 4,
            radii: 24,
            directions: if d <= 2 { 32 } else { 64 },
            ..Self::default_for(d)
        }
    }

    pub fn radial_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.inner_radii)
            .map(|i| i as f64 / self.inner_radii as f64)
            .collect();
        let n = self.radii.max(1);
        for i in 0..n {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            out.push(self.r_min * (self.r_max / self.r_min).powf(t));
        }
        out
    }

    pub fn points(&self, d: usize) -> Vec<Vec<f64>> {
        let dirs = directions(d, self.directions, self.seed);
        let mut pts = Vec::new();
        for r in self.radial_values() {
            if r == 0.0 {
                pts.push(vec![0.0; d]);
                continue;
            }
            for u in &dirs {
                pts.push(u.iter().map(|x| x * r).collect());
            }
        }
        pts
    }
}

/// Unit directions: uniform on the circle for d = 2, a Fibonacci sphere for
/// d = 3, seeded Gaussian samples otherwise.
pub fn directions(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| random_unit(&mut rng, d)).collect()
        }
    }
}

pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| {
                let u1: f64 = rng.gen::<f64>().max(1e-300);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormMode {
    Exact,
    Sampled(GridSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    Exact,
    SampledLowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub mode: EstimateKind,
    pub grid: Option<GridSpec>,
}

/// K·⟨ξ⟩^q·|ξ|^p on lo ≤ |ξ| < hi.
#[derive(Clone, Debug)]
struct Profile {
    konst: Konst,
    q: f64,
    p: f64,
    lo: f64,
    hi: f64,
}

#[derive(Clone, Debug)]
enum Konst {
    Scalar(C64),
    Mat(CMat),
}

impl Konst {
    fn mul(&self, other: &Konst) -> Konst {
        match (self, other) {
            (Konst::Scalar(a), Konst::Scalar(b)) => Konst::Scalar(a * b),
            (Konst::Scalar(a), Konst::Mat(m)) | (Konst::Mat(m), Konst::Scalar(a)) => Konst::Mat(m * *a),
            (Konst::Mat(a), Konst::Mat(b)) => Konst::Mat(a * b),
        }
    }

    fn add(&self, other: &Konst) -> Konst {
        match (self, other) {
            (Konst::Scalar(a), Konst::Scalar(b)) => Konst::Scalar(a + b),
            (Konst::Scalar(a), Konst::Mat(m)) | (Konst::Mat(m), Konst::Scalar(a)) => {
                let mut out = m.clone();
                for j in 0..out.nrows() {
                    out[(j, j)] += a;
                }
                Konst::Mat(out)
            }
            (Konst::Mat(a), Konst::Mat(b)) => Konst::Mat(a + b),
        }
    }

    fn norm(&self) -> f64 {
        match self {
            Konst::Scalar(c) => c.norm(),
            Konst::Mat(m) => op_norm(m),
        }
    }

    fn mask(&self, part: EntryPart) -> Konst {
        match (self, part) {
            (Konst::Scalar(c), EntryPart::Diagonal) => Konst::Scalar(*c),
            (Konst::Scalar(_), EntryPart::OffDiagonal) => Konst::Scalar(C64::new(0.0, 0.0)),
            (Konst::Mat(m), part) => {
                let mut out = m.clone();
                for j in 0..out.nrows() {
                    for k in 0..out.ncols() {
                        if (j == k) != (part == EntryPart::Diagonal) {
                            out[(j, k)] = C64::new(0.0, 0.0);
                        }
                    }
                }
                Konst::Mat(out)
            }
        }
    }
}

fn unit_profile() -> Profile {
    Profile {
        konst: Konst::Scalar(C64::new(1.0, 0.0)),
        q: 0.0,
        p: 0.0,
        lo: 0.0,
        hi: f64::INFINITY,
    }
}

fn profile(c: &Coeff) -> Option<Profile> {
    let mut p = unit_profile();
    match c.node() {
        Node::Zero => p.konst = Konst::Scalar(C64::new(0.0, 0.0)),
        Node::Scalar(s) => p.konst = Konst::Scalar(*s),
        Node::Const(m) => p.konst = Konst::Mat(m.clone()),
        Node::Jap(g) => p.q = *g,
        Node::Hom(g) => p.p = *g,
        Node::Ge(r) => p.lo = *r,
        Node::Lt(r) => p.hi = *r,
        Node::Product(fs) => {
            for f in fs {
                let q = profile(f)?;
                p.konst = p.konst.mul(&q.konst);
                p.q += q.q;
                p.p += q.p;
                p.lo = p.lo.max(q.lo);
                p.hi = p.hi.min(q.hi);
            }
        }
        Node::Sum(ts) => {
            let mut acc: Option<Profile> = None;
            for t in ts {
                let q = profile(t)?;
                acc = Some(match acc {
                    None => q,
                    Some(a) => {
                        if a.q != q.q || a.p != q.p || a.lo != q.lo || a.hi != q.hi {
                            return None;
                        }
                        Profile {
                            konst: a.konst.add(&q.konst),
                            ..a
                        }
                    }
                });
            }
            return acc;
        }
        Node::EntryMask(part, inner) => {
            let q = profile(inner)?;
            return Some(Profile {
                konst: q.konst.mask(*part),
                ..q
            });
        }
        Node::Adjoint(inner) => {
            let q = profile(inner)?;
            let konst = match q.konst {
                Konst::Scalar(c) => Konst::Scalar(c.conj()),
                Konst::Mat(m) => Konst::Mat(m.adjoint()),
            };
            return Some(Profile { konst, ..q });
        }
        _ => return None,
    }
    Some(p)
}

/// sup over r ∈ [lo, hi) of r^p (1+r)^e.
pub fn radial_sup(p: f64, e: f64, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let f = |r: f64| -> f64 {
        if r == 0.0 {
            if p > 0.0 {
                0.0
            } else if p == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            r.powf(p) * (1.0 + r).powf(e)
        }
    };
    let mut best = f(lo);
    if p + e != 0.0 {
        let rs = -p / (p + e);
        if rs > lo && rs < hi {
            best = best.max(f(rs));
        }
    }
    if hi.is_finite() {
        best = best.max(f(hi));
    } else {
        let tail = if p + e > 0.0 {
            f64::INFINITY
        } else if p + e == 0.0 {
            1.0
        } else {
            0.0
        };
        best = best.max(tail);
    }
    best
}

/// Closed-form sup_ξ ⟨ξ⟩^{−γ}‖c(ξ)‖, or None outside the exact family.
pub fn exact_sup(c: &Coeff, gamma: f64) -> Option<f64> {
    let p = profile(c)?;
    let k = p.konst.norm();
    if k == 0.0 {
        return Some(0.0);
    }
    Some(k * radial_sup(p.p, p.q - gamma, p.lo, p.hi))
}

/// Whether every coefficient of `b` admits a closed-form sup.
pub fn is_exact_family(b: &MatrixSymbol) -> bool {
    b.entries().all(|(_, c)| profile(c).is_some())
}

fn grid_sups(b: &MatrixSymbol, gamma: f64, grid: &GridSpec) -> Result<Vec<(Frequency, f64)>, SymbolError> {
    let thetas = b.frequencies();
    let pts = grid.points(b.dim());
    let per_point: Vec<Result<Vec<f64>, SymbolError>> = pts
        .par_iter()
        .map(|x| {
            let mut ctx = EvalContext::new(x);
            let w = (1.0 + super::freq::norm(x)).powf(-gamma);
            thetas
                .iter()
                .map(|t| Ok(w * b.eval_in(&mut ctx, t)?.op_norm()))
                .collect()
        })
        .collect();
    let mut sups = vec![0.0f64; thetas.len()];
    for row in per_point {
        for (s, v) in sups.iter_mut().zip(row?) {
            *s = s.max(v);
        }
    }
    Ok(thetas.into_iter().zip(sups).collect())
}

/// Per-frequency sups ⟨ξ⟩^{−γ}‖b_θ(ξ)‖ in the requested mode.
pub fn coefficient_sups(
    b: &MatrixSymbol,
    gamma: f64,
    mode: &NormMode,
) -> Result<Vec<(Frequency, f64)>, SymbolError> {
    match mode {
        NormMode::Exact => b
            .entries()
            .map(|(t, c)| {
                exact_sup(c, gamma)
                    .map(|v| (t.clone(), v))
                    .ok_or_else(|| SymbolError::ExactModeUnavailable(format!("coefficient at {t:?}")))
            })
            .collect(),
        NormMode::Sampled(grid) => grid_sups(b, gamma, grid),
    }
}

/// ⟦b⟧_l^γ.
pub fn norm(b: &MatrixSymbol, gamma: f64, l: f64, mode: &NormMode) -> Result<NormEstimate, SymbolError> {
    let sups = coefficient_sups(b, gamma, mode)?;
    let value = sups.iter().map(|(t, s)| freq_weight(t).powf(l) * s).sum();
    Ok(match mode {
        NormMode::Exact => NormEstimate {
            value,
            mode: EstimateKind::Exact,
            grid: None,
        },
        NormMode::Sampled(g) => NormEstimate {
            value,
            mode: EstimateKind::SampledLowerBound,
            grid: Some(g.clone()),
        },
    })
}

/// Exact when possible, sampled on `grid` otherwise.
pub fn norm_auto(b: &MatrixSymbol, gamma: f64, l: f64, grid: &GridSpec) -> Result<NormEstimate, SymbolError> {
    if is_exact_family(b) {
        norm(b, gamma, l, &NormMode::Exact)
    } else {
        norm(b, gamma, l, &NormMode::Sampled(grid.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_norm_examples() {
        let c = Coeff::jap(-1.0).scale(C64::new(2.0, 0.0));
        let b = MatrixSymbol::zero(2, 2)
            .with_entry(Frequency::from_f64(&[1.0, 0.0]), c.clone())
            .with_entry(Frequency::from_f64(&[-1.0, 0.0]), c);
        let n0 = norm(&b, -1.0, 0.0, &NormMode::Exact).unwrap();
        assert!((n0.value - 4.0).abs() < 1e-14);
        let n1 = norm(&b, -1.0, 1.0, &NormMode::Exact).unwrap();
        assert!((n1.value - 8.0).abs() < 1e-14);
        let s = norm(&b, -1.0, 0.0, &NormMode::Sampled(GridSpec::default_for(2))).unwrap();
        assert!(s.value <= 4.0 + 1e-12 && s.value > 3.9);
        assert_eq!(norm(&MatrixSymbol::zero(2, 2), 0.0, 0.0, &NormMode::Exact).unwrap().value, 0.0);
    }

    #[test]
    fn radial_sup_cases() {
        assert!((radial_sup(0.0, -1.0, 0.0, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert_eq!(radial_sup(0.0, 1.0, 0.0, f64::INFINITY), f64::INFINITY);
        assert!((radial_sup(1.0, -1.0, 0.0, f64::INFINITY) - 1.0).abs() < 1e-15);
        // r/(1+r)^2 peaks at r = 1 with value 1/4.
        assert!((radial_sup(1.0, -2.0, 0.0, f64::INFINITY) - 0.25).abs() < 1e-15);
        assert!((radial_sup(0.0, 2.0, 0.0, 3.0) - 16.0).abs() < 1e-12);
        assert_eq!(radial_sup(0.0, 0.0, 2.0, 1.0), 0.0);
    }

    #[test]
    fn exact_family_detection() {
        let shifted = Coeff::jap(1.0).shift(&Frequency::from_f64(&[1.0, 0.0]));
        let b = MatrixSymbol::principal(2, 1, shifted);
        assert!(!is_exact_family(&b));
        assert!(matches!(norm(&b, 0.0, 0.0, &NormMode::Exact), Err(SymbolError::ExactModeUnavailable(_))));
    }
}
