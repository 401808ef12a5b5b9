//! Hermitian Clifford generators, the free Dirac symbol, its diagonalizing
//! unitary, and the splitting of conjugated perturbations.
//!
//! Generators satisfy h_j h_k + h_k h_j = 2δ_jk and anticommute with the
//! grading Γ = diag(Id, −Id). All entries are dyadic rationals times powers
//! of i, so the relations hold exactly in floating point.

use serde_json::json;
use thiserror::Error;

use crate::symbols::{CMat, Coeff, EntryPart, EvalContext, Frequency, MatrixSymbol, SymbolError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("Clifford generators need d >= 2, got {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub d: usize,
    pub m: usize,
    pub generators: Vec<CMat>,
    pub grading: CMat,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat2(a: [C64; 4]) -> CMat {
    CMat::from_row_slice(2, 2, &a)
}

pub fn pauli() -> [CMat; 3] {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [mat2([o, l, l, o]), mat2([o, -i, i, o]), mat2([l, o, o, -l])]
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn block_offdiag(s: &CMat) -> CMat {
    let n = s.nrows();
    let mut out = CMat::zeros(2 * n, 2 * n);
    out.view_mut((0, n), (n, n)).copy_from(s);
    out.view_mut((n, 0), (n, n)).copy_from(s);
    out
}

/// Even-dimensional recursion; Γ is diagonal but not sorted.
fn build_even_unsorted(d: usize) -> (Vec<CMat>, CMat) {
    let [s1, s2, s3] = pauli();
    if d == 2 {
        return (vec![s1, s2], s3);
    }
    let (hs, g) = build_even_unsorted(d - 2);
    let id = CMat::identity(hs[0].nrows(), hs[0].nrows());
    let mut out: Vec<CMat> = hs.iter().map(|h| kron(h, &s3)).collect();
    out.push(kron(&id, &s1));
    out.push(kron(&id, &s2));
    (out, kron(&g, &s3))
}

/// Conjugates by the permutation listing the +1 entries of diagonal Γ first.
fn sort_by_grading(hs: Vec<CMat>, g: CMat) -> (Vec<CMat>, CMat) {
    let m = g.nrows();
    let mut order: Vec<usize> = (0..m).filter(|&i| g[(i, i)].re > 0.0).collect();
    order.extend((0..m).filter(|&i| g[(i, i)].re < 0.0));
    let permute = |x: &CMat| CMat::from_fn(m, m, |r, s| x[(order[r], order[s])]);
    (hs.iter().map(permute).collect(), permute(&g))
}

/// Generators h₁…h_d and grading Γ in dimension d ≥ 2.
pub fn build_generators(d: usize) -> Result<CliffordRep, CliffordError> {
    if d < 2 {
        return Err(CliffordError::UnsupportedDimension(d));
    }
    let (generators, grading) = match d {
        2 => {
            let [s1, s2, s3] = pauli();
            (vec![s1, s2], s3)
        }
        3 => {
            let p = pauli();
            let hs = p.iter().map(block_offdiag).collect();
            let mut g = CMat::identity(4, 4);
            g[(2, 2)] = c(-1.0, 0.0);
            g[(3, 3)] = c(-1.0, 0.0);
            (hs, g)
        }
        _ if d % 2 == 0 => {
            let (hs, g) = build_even_unsorted(d);
            sort_by_grading(hs, g)
        }
        _ => {
            let (mut hs, _) = build_even_unsorted(d + 1);
            let gamma = hs.pop().unwrap();
            let n = gamma.nrows() / 2;
            let w = mat2([c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]);
            let v = kron(&CMat::identity(n, n), &w);
            let vh = v.adjoint();
            let conj = |x: &CMat| (&vh * x * &v) * c(0.5, 0.0);
            let hs: Vec<CMat> = hs.iter().map(conj).collect();
            let g = conj(&gamma);
            sort_by_grading(hs, g)
        }
    };
    Ok(CliffordRep {
        d,
        m: grading.nrows(),
        generators,
        grading,
    })
}

impl CliffordRep {
    /// Max entry of every relation defect; 0 when all relations hold exactly.
    pub fn relation_defect(&self) -> f64 {
        let m = self.m;
        let id = CMat::identity(m, m);
        let mut worst: f64 = 0.0;
        let mut upd = |x: CMat| worst = worst.max(x.iter().map(|z| z.norm()).fold(0.0, f64::max));
        for (j, hj) in self.generators.iter().enumerate() {
            for (k, hk) in self.generators.iter().enumerate() {
                let target = if j == k { &id * c(2.0, 0.0) } else { CMat::zeros(m, m) };
                upd(hj * hk + hk * hj - target);
            }
            upd(&self.grading * hj + hj * &self.grading);
            upd(hj.adjoint() - hj);
        }
        upd(&self.grading * &self.grading - &id);
        let mut sorted = CMat::zeros(m, m);
        for i in 0..m {
            sorted[(i, i)] = if i < m / 2 { c(1.0, 0.0) } else { c(-1.0, 0.0) };
        }
        upd(&self.grading - sorted);
        worst
    }

    pub fn identity(&self) -> CMat {
        CMat::identity(self.m, self.m)
    }

    /// Matrices as row-major [re, im] pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let enc = |x: &CMat| -> Vec<Vec<[f64; 2]>> {
            (0..x.nrows())
                .map(|r| (0..x.ncols()).map(|s| [x[(r, s)].re, x[(r, s)].im]).collect())
                .collect()
        };
        json!({
            "d": self.d,
            "m": self.m,
            "generators": self.generators.iter().map(enc).collect::<Vec<_>>(),
            "grading": enc(&self.grading),
        })
    }
}

/// Σ ξ_j h_j + M·Γ at θ = 0.
pub fn free_dirac_symbol(rep: &CliffordRep, mass: f64) -> MatrixSymbol {
    let mut terms: Vec<Coeff> = rep
        .generators
        .iter()
        .enumerate()
        .map(|(j, h)| Coeff::product(vec![Coeff::coord(j), Coeff::constant(h.clone())]))
        .collect();
    terms.push(Coeff::constant(&rep.grading * c(mass, 0.0)));
    MatrixSymbol::principal(rep.d, rep.m, Coeff::sum(terms)).with_order(1.0)
}

/// 1_{|ξ|≥1}·ξ_k/|ξ|.
fn unit_coord(k: usize) -> Coeff {
    Coeff::product(vec![Coeff::ge(1.0), Coeff::hom(-1.0), Coeff::coord(k)])
}

/// u(ξ) = 1_{|ξ|≥1}(Id + Γ·Σξ_j h_j/|ξ|)/√2 + 1_{|ξ|<1}·Id.
pub fn diagonalizing_unitary(rep: &CliffordRep) -> MatrixSymbol {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut terms = vec![
        Coeff::product(vec![Coeff::ge(1.0), Coeff::constant(rep.identity() * c(r, 0.0))]),
        Coeff::product(vec![Coeff::lt(1.0), Coeff::constant(rep.identity())]),
    ];
    for (k, h) in rep.generators.iter().enumerate() {
        terms.push(Coeff::product(vec![
            unit_coord(k),
            Coeff::constant(&rep.grading * h * c(r, 0.0)),
        ]));
    }
    MatrixSymbol::principal(rep.d, rep.m, Coeff::sum(terms))
}

#[derive(Clone, Debug)]
pub struct DiracConjugation {
    /// u∘(free Dirac + MΓ)∘u†.
    pub conjugated: MatrixSymbol,
    /// |ξ|Γ plus, for M > 0, the odd mass term 1_{|ξ|≥1}·u(MΓ)u†.
    pub diagonalized: MatrixSymbol,
    /// conjugated − diagonalized; supported in {|ξ| < 1}.
    pub residual: MatrixSymbol,
}

pub fn conjugate_dirac(rep: &CliffordRep, mass: f64) -> Result<DiracConjugation, CliffordError> {
    let u = diagonalizing_unitary(rep);
    let a = free_dirac_symbol(rep, mass);
    let conjugated = u.compose(&a)?.compose(&u.adjoint())?;
    let principal = MatrixSymbol::principal(
        rep.d,
        rep.m,
        Coeff::product(vec![Coeff::hom(1.0), Coeff::constant(rep.grading.clone())]),
    )
    .with_order(1.0);
    let mut diagonalized = principal;
    if mass != 0.0 {
        let mg = MatrixSymbol::principal(rep.d, rep.m, Coeff::constant(&rep.grading * c(mass, 0.0)));
        let mass_part = u.compose(&mg)?.compose(&u.adjoint())?;
        let cut = MatrixSymbol::principal(rep.d, rep.m, Coeff::ge(1.0));
        diagonalized = diagonalized.add(&cut.compose(&mass_part)?)?;
    }
    let residual = conjugated.sub(&diagonalized)?;
    Ok(DiracConjugation {
        conjugated,
        diagonalized,
        residual,
    })
}

/// Scalar perturbation components: 𝐁 = B_Id·Id + B_Γ·Γ + Σ_j B_j·h_j.
#[derive(Clone, Debug)]
pub struct PerturbationParts {
    pub b_id: MatrixSymbol,
    pub b_gamma: MatrixSymbol,
    pub b_gen: Vec<MatrixSymbol>,
}

#[derive(Clone, Debug)]
pub struct PerturbationSplit {
    /// The full conjugate u∘𝐁∘u†.
    pub conjugated: MatrixSymbol,
    /// Γ-commuting (matrix-diagonal) terms.
    pub uncoupled: MatrixSymbol,
    /// Γ-anticommuting terms (block off-diagonal).
    pub odd: MatrixSymbol,
    /// Antisymmetrized terms ½(U_a B U_b − U_b B U_a), one order lower.
    pub lower_order: MatrixSymbol,
    /// Terms involving the 1_{|ξ|<1} part of u.
    pub cutoff_remainder: MatrixSymbol,
}

/// s ⊗ M for a scalar symbol s.
pub fn tensor_const(s: &MatrixSymbol, m: &CMat) -> MatrixSymbol {
    let mut out = MatrixSymbol::zero(s.dim(), m.nrows()).with_order(s.order);
    for (t, x) in s.entries() {
        out.add_entry(t.clone(), Coeff::product(vec![x.clone(), Coeff::constant(m.clone())]));
    }
    out
}

fn scalar_principal(d: usize, x: Coeff) -> MatrixSymbol {
    MatrixSymbol::principal(d, 1, x)
}

pub fn assemble_perturbation(rep: &CliffordRep, parts: &PerturbationParts) -> Result<MatrixSymbol, CliffordError> {
    let mut terms = vec![
        tensor_const(&parts.b_id, &rep.identity()),
        tensor_const(&parts.b_gamma, &rep.grading),
    ];
    for (b, h) in parts.b_gen.iter().zip(&rep.generators) {
        terms.push(tensor_const(b, h));
    }
    let refs: Vec<(C64, &MatrixSymbol)> = terms.iter().map(|t| (c(1.0, 0.0), t)).collect();
    Ok(MatrixSymbol::linear_combine(&refs)?)
}

/// Conjugates 𝐁 by u and sorts the result by Γ-parity.
pub fn decompose_perturbation(rep: &CliffordRep, parts: &PerturbationParts) -> Result<PerturbationSplit, CliffordError> {
    let d = rep.d;
    let m = rep.m;
    for s in std::iter::once(&parts.b_id).chain(std::iter::once(&parts.b_gamma)).chain(parts.b_gen.iter()) {
        if s.spinor_dim() != 1 || s.dim() != d {
            return Err(SymbolError::DimensionMismatch {
                expected: format!("scalar symbols in d={d}"),
                found: format!("m={}, d={}", s.spinor_dim(), s.dim()),
            }
            .into());
        }
    }
    if parts.b_gen.len() != d {
        return Err(SymbolError::DimensionMismatch {
            expected: format!("{d} generator components"),
            found: format!("{}", parts.b_gen.len()),
        }
        .into());
    }
    let bold = assemble_perturbation(rep, parts)?;
    let u = diagonalizing_unitary(rep);
    let conjugated = u.compose(&bold)?.compose(&u.adjoint())?;

    let mut us = vec![scalar_principal(d, Coeff::one())];
    let mut gs = vec![rep.identity()];
    for (k, h) in rep.generators.iter().enumerate() {
        us.push(scalar_principal(d, unit_coord(k)));
        gs.push(&rep.grading * h);
    }
    let mut es: Vec<(&MatrixSymbol, CMat)> = vec![(&parts.b_id, rep.identity()), (&parts.b_gamma, rep.grading.clone())];
    for (b, h) in parts.b_gen.iter().zip(&rep.generators) {
        es.push((b, h.clone()));
    }

    let gamma = &rep.grading;
    let half = c(0.5, 0.0);
    let mut uncoupled = Vec::new();
    let mut odd = Vec::new();
    let mut lower = Vec::new();
    for (b, e) in &es {
        if b.is_zero() {
            continue;
        }
        for a_i in 0..us.len() {
            for b_i in a_i..us.len() {
                let m_ab = &gs[a_i] * e * gs[b_i].adjoint();
                let uab = us[a_i].compose(b)?.compose(&us[b_i])?;
                if a_i == b_i {
                    push_by_parity(&uab, &(m_ab * half), gamma, &mut uncoupled, &mut odd);
                    continue;
                }
                let m_ba = &gs[b_i] * e * gs[a_i].adjoint();
                let uba = us[b_i].compose(b)?.compose(&us[a_i])?;
                let sym = MatrixSymbol::linear_combine(&[(half, &uab), (half, &uba)])?;
                let anti = MatrixSymbol::linear_combine(&[(half, &uab), (-half, &uba)])?;
                push_by_parity(&sym, &((&m_ab + &m_ba) * half), gamma, &mut uncoupled, &mut odd);
                let m_anti = (&m_ab - &m_ba) * half;
                if m_anti.iter().any(|z| z.norm() > 0.0) {
                    lower.push(tensor_const(&anti, &m_anti));
                }
            }
        }
    }
    let sum = |v: Vec<MatrixSymbol>| -> Result<MatrixSymbol, CliffordError> {
        if v.is_empty() {
            return Ok(MatrixSymbol::zero(d, m));
        }
        let refs: Vec<(C64, &MatrixSymbol)> = v.iter().map(|t| (c(1.0, 0.0), t)).collect();
        Ok(MatrixSymbol::linear_combine(&refs)?)
    };
    let uncoupled = sum(uncoupled)?;
    let odd = sum(odd)?;
    let lower_order = sum(lower)?;

    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut u_main_terms = vec![Coeff::constant(rep.identity() * c(r, 0.0))];
    for (k, g) in gs.iter().enumerate().skip(1) {
        u_main_terms.push(Coeff::product(vec![unit_coord(k - 1), Coeff::constant(g * c(r, 0.0))]));
    }
    let u_main = MatrixSymbol::principal(d, m, Coeff::sum(u_main_terms));
    let main = u_main.compose(&bold)?.compose(&u_main.adjoint())?;
    let cutoff_remainder = conjugated.sub(&main)?;
    Ok(PerturbationSplit {
        conjugated,
        uncoupled,
        odd,
        lower_order,
        cutoff_remainder,
    })
}

fn push_by_parity(s: &MatrixSymbol, mat: &CMat, gamma: &CMat, even: &mut Vec<MatrixSymbol>, odd: &mut Vec<MatrixSymbol>) {
    if s.is_zero() {
        return;
    }
    let flipped = gamma * mat * gamma;
    let e = (mat + &flipped) * c(0.5, 0.0);
    let o = (mat - &flipped) * c(0.5, 0.0);
    if e.iter().any(|z| z.norm() > 0.0) {
        even.push(tensor_const(s, &e));
    }
    if o.iter().any(|z| z.norm() > 0.0) {
        odd.push(tensor_const(s, &o));
    }
}

impl PerturbationSplit {
    /// Max entry of |conjugated − (uncoupled + odd + lower + cutoff)| at the points.
    pub fn reconstruction_defect(&self, points: &[Vec<f64>]) -> Result<f64, CliffordError> {
        let total = self
            .uncoupled
            .add(&self.odd)?
            .add(&self.lower_order)?
            .add(&self.cutoff_remainder)?;
        let mut thetas = self.conjugated.frequencies();
        thetas.extend(total.frequencies());
        thetas.sort();
        thetas.dedup();
        let m = self.conjugated.spinor_dim();
        let mut worst: f64 = 0.0;
        for x in points {
            let mut c1 = EvalContext::new(x);
            let mut c2 = EvalContext::new(x);
            for t in &thetas {
                let a = self.conjugated.eval_in(&mut c1, t)?.to_matrix(m);
                let b = total.eval_in(&mut c2, t)?.to_matrix(m);
                worst = worst.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }

    /// Max over the points of the Γ-commuting part of the odd coefficients.
    pub fn odd_shape_defect(&self, gamma: &CMat, points: &[Vec<f64>]) -> Result<f64, CliffordError> {
        let m = self.odd.spinor_dim();
        let mut worst: f64 = 0.0;
        for x in points {
            let mut ctx = EvalContext::new(x);
            for t in self.odd.frequencies() {
                let v = self.odd.eval_in(&mut ctx, &t)?.to_matrix(m);
                let even = (&v + gamma * &v * gamma) * c(0.5, 0.0);
                worst = worst.max(even.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }

    /// Max off-diagonal entry of the uncoupled coefficients at the points.
    pub fn uncoupled_offdiag(&self, points: &[Vec<f64>]) -> Result<f64, CliffordError> {
        let off = self.uncoupled.entry_masked(EntryPart::OffDiagonal);
        let m = off.spinor_dim();
        let mut worst: f64 = 0.0;
        for x in points {
            let mut ctx = EvalContext::new(x);
            for t in off.frequencies() {
                let v = off.eval_in(&mut ctx, &t)?.to_matrix(m);
                worst = worst.max(v.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }
}

/// Convenience: a scalar symbol c·(δ_θ + δ_{−θ}) ("cos-type").
pub fn cos_scalar(theta: &[f64], coeff: f64) -> MatrixSymbol {
    let t = Frequency::from_f64(theta);
    MatrixSymbol::zero(theta.len(), 1)
        .with_entry(t.clone(), Coeff::real(coeff))
        .with_entry(-&t, Coeff::real(coeff))
}
