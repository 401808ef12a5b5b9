//! Pointwise evaluation of coefficient expressions with per-point memoization.

use rustc_hash::FxHashMap;

use super::expr::{Coeff, CMat, EntryPart, MaskedQuotient, Node, ResonanceMask, ResonancePart, C64};
use super::freq::Frequency;
use super::SymbolError;
use crate::gauge::resonance::chi_entry;

/// The value of a coefficient at a point. `Scalar(c)` stands for c·Id.
#[derive(Clone, Debug)]
pub enum Value {
    Zero,
    Scalar(C64),
    Mat(CMat),
}

impl Value {
    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Zero)
    }

    pub fn to_matrix(&self, m: usize) -> CMat {
        match self {
            Value::Zero => CMat::zeros(m, m),
            Value::Scalar(c) => CMat::identity(m, m) * *c,
            Value::Mat(x) => x.clone(),
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Zero, v) | (v, Value::Zero) => v.clone(),
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + b),
            (Value::Scalar(a), Value::Mat(x)) | (Value::Mat(x), Value::Scalar(a)) => {
                let mut out = x.clone();
                for j in 0..out.nrows() {
                    out[(j, j)] += a;
                }
                Value::Mat(out)
            }
            (Value::Mat(x), Value::Mat(y)) => Value::Mat(x + y),
        }
    }

    pub fn mul(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Zero, _) | (_, Value::Zero) => Value::Zero,
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a * b),
            (Value::Scalar(a), Value::Mat(x)) | (Value::Mat(x), Value::Scalar(a)) => {
                Value::Mat(x * *a)
            }
            (Value::Mat(x), Value::Mat(y)) => Value::Mat(x * y),
        }
    }

    pub fn scale(&self, c: C64) -> Value {
        self.mul(&Value::Scalar(c))
    }

    pub fn adjoint(&self) -> Value {
        match self {
            Value::Zero => Value::Zero,
            Value::Scalar(c) => Value::Scalar(c.conj()),
            Value::Mat(x) => Value::Mat(x.adjoint()),
        }
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        match self {
            Value::Zero => 0.0,
            Value::Scalar(c) => c.norm(),
            Value::Mat(x) => op_norm(x),
        }
    }

    /// Real parts of the diagonal entries, padded to length `m`.
    pub fn diag_real(&self, m: usize) -> Vec<f64> {
        match self {
            Value::Zero => vec![0.0; m],
            Value::Scalar(c) => vec![c.re; m],
            Value::Mat(x) => (0..m).map(|j| x[(j, j)].re).collect(),
        }
    }

    pub fn entry(&self, j: usize, k: usize) -> C64 {
        match self {
            Value::Zero => C64::new(0.0, 0.0),
            Value::Scalar(c) => {
                if j == k {
                    *c
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Value::Mat(x) => x[(j, k)],
        }
    }
}

/// Spectral norm of a complex matrix.
pub fn op_norm(x: &CMat) -> f64 {
    if x.nrows() == 1 && x.ncols() == 1 {
        return x[(0, 0)].norm();
    }
    x.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// Evaluation state for one base point ξ. Composite nodes are cached by
/// (node identity, frequency offset); the cache keeps nodes alive so their
/// addresses stay unique for the context's lifetime.
pub struct EvalContext {
    base: Vec<f64>,
    memo: FxHashMap<(usize, Frequency), (Coeff, Value)>,
}

impl EvalContext {
    pub fn new(base: &[f64]) -> Self {
        EvalContext {
            base: base.to_vec(),
            memo: FxHashMap::default(),
        }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    fn point(&self, offset: &Frequency) -> Vec<f64> {
        self.base
            .iter()
            .enumerate()
            .map(|(j, x)| x + offset.component(j))
            .collect()
    }

    fn radius(&self, offset: &Frequency) -> f64 {
        self.base
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let y = x + offset.component(j);
                y * y
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Value of `c` at ξ + offset.
    pub fn eval(&mut self, c: &Coeff, offset: &Frequency) -> Result<Value, SymbolError> {
        match c.node() {
            Node::Zero => return Ok(Value::Zero),
            Node::Scalar(s) => return Ok(Value::Scalar(*s)),
            Node::Const(m) => return Ok(Value::Mat(m.clone())),
            Node::Jap(g) => {
                let r = self.radius(offset);
                return Ok(Value::Scalar(C64::new((1.0 + r).powf(*g), 0.0)));
            }
            Node::Hom(g) => {
                let r = self.radius(offset);
                let v = if r == 0.0 && *g > 0.0 { 0.0 } else { r.powf(*g) };
                return Ok(Value::Scalar(C64::new(v, 0.0)));
            }
            Node::Coord(j) => {
                let v = self.base[*j] + offset.component(*j);
                return Ok(Value::Scalar(C64::new(v, 0.0)));
            }
            Node::Ge(r) => {
                return Ok(if self.radius(offset) >= *r {
                    Value::Scalar(C64::new(1.0, 0.0))
                } else {
                    Value::Zero
                })
            }
            Node::Lt(r) => {
                return Ok(if self.radius(offset) < *r {
                    Value::Scalar(C64::new(1.0, 0.0))
                } else {
                    Value::Zero
                })
            }
            Node::Shift(theta, inner) => {
                let total = offset + theta;
                return self.eval(inner, &total);
            }
            _ => {}
        }
        let key = (c.id(), offset.clone());
        if let Some((_, v)) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = self.eval_composite(c, offset)?;
        self.memo.insert(key, (c.clone(), v.clone()));
        Ok(v)
    }

    fn eval_composite(&mut self, c: &Coeff, offset: &Frequency) -> Result<Value, SymbolError> {
        match c.node() {
            Node::Sum(terms) => {
                let mut acc = Value::Zero;
                for t in terms {
                    let v = self.eval(t, offset)?;
                    acc = acc.add(&v);
                }
                Ok(acc)
            }
            Node::Product(factors) => {
                for f in factors {
                    if matches!(f.node(), Node::Ge(_) | Node::Lt(_)) && self.eval(f, offset)?.is_zero() {
                        return Ok(Value::Zero);
                    }
                }
                let mut acc = Value::Scalar(C64::new(1.0, 0.0));
                for f in factors {
                    if matches!(f.node(), Node::Ge(_) | Node::Lt(_)) {
                        continue;
                    }
                    let v = self.eval(f, offset)?;
                    if v.is_zero() {
                        return Ok(Value::Zero);
                    }
                    acc = acc.mul(&v);
                }
                Ok(acc)
            }
            Node::Adjoint(inner) => Ok(self.eval(inner, offset)?.adjoint()),
            Node::EntryMask(part, inner) => {
                let v = self.eval(inner, offset)?;
                Ok(mask_value(v, *part))
            }
            Node::Resonance(r) => self.eval_resonance(r, offset),
            Node::Quotient(q) => self.eval_quotient(q, offset),
            _ => unreachable!("leaf nodes are evaluated directly"),
        }
    }

    fn diag_pair(
        &mut self,
        diag: &Coeff,
        shift: &Frequency,
        offset: &Frequency,
        m: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, f64, f64), SymbolError> {
        let shifted = offset + shift;
        let a_shift = self.eval(diag, &shifted)?.diag_real(m);
        let a_here = self.eval(diag, offset)?.diag_real(m);
        let w_here = 1.0 + self.radius(offset);
        let w_shift = 1.0 + self.radius(&shifted);
        Ok((a_shift, a_here, w_here, w_shift))
    }

    fn eval_resonance(&mut self, r: &ResonanceMask, offset: &Frequency) -> Result<Value, SymbolError> {
        let inner = self.eval(&r.inner, offset)?;
        if inner.is_zero() {
            return Ok(Value::Zero);
        }
        let m = r.dim;
        let (a_shift, a_here, w_here, w_shift) = self.diag_pair(&r.diag, &r.shift, offset, m)?;
        let theta_zero = r.shift.is_zero();
        let mut out = CMat::zeros(m, m);
        let mut any = false;
        for j in 0..m {
            for k in 0..m {
                let chi = chi_entry(&r.spec, a_shift[j], a_here[k], w_here, w_shift, theta_zero, j, k);
                let keep = match r.keep {
                    ResonancePart::NonResonant => chi,
                    ResonancePart::Resonant => !chi,
                };
                if keep {
                    let e = inner.entry(j, k);
                    if e.re != 0.0 || e.im != 0.0 {
                        out[(j, k)] = e;
                        any = true;
                    }
                }
            }
        }
        Ok(pack(out, any, m))
    }

    fn eval_quotient(&mut self, q: &MaskedQuotient, offset: &Frequency) -> Result<Value, SymbolError> {
        let num = self.eval(&q.numerator, offset)?;
        if num.is_zero() {
            return Ok(Value::Zero);
        }
        let m = q.dim;
        let (a_shift, a_here, w_here, w_shift) = self.diag_pair(&q.diag, &q.shift, offset, m)?;
        let theta_zero = q.shift.is_zero();
        let mut out = CMat::zeros(m, m);
        let mut any = false;
        for j in 0..m {
            for k in 0..m {
                let e = num.entry(j, k);
                if e.re == 0.0 && e.im == 0.0 {
                    continue;
                }
                if !chi_entry(&q.spec, a_shift[j], a_here[k], w_here, w_shift, theta_zero, j, k) {
                    continue;
                }
                let den = a_shift[j] - a_here[k];
                if den == 0.0 {
                    return Err(SymbolError::MaskedDivisionOutsideSupport {
                        theta: q.shift.to_vec(),
                        xi: self.point(offset),
                        row: j,
                        col: k,
                    });
                }
                out[(j, k)] = C64::new(0.0, 1.0) * e / den;
                any = true;
            }
        }
        Ok(pack(out, any, m))
    }
}

fn pack(out: CMat, any: bool, m: usize) -> Value {
    if !any {
        Value::Zero
    } else if m == 1 {
        Value::Scalar(out[(0, 0)])
    } else {
        Value::Mat(out)
    }
}

fn mask_value(v: Value, part: EntryPart) -> Value {
    match (v, part) {
        (Value::Zero, _) => Value::Zero,
        (Value::Scalar(c), EntryPart::Diagonal) => Value::Scalar(c),
        (Value::Scalar(_), EntryPart::OffDiagonal) => Value::Zero,
        (Value::Mat(mut x), part) => {
            for j in 0..x.nrows() {
                for k in 0..x.ncols() {
                    if (j == k) != (part == EntryPart::Diagonal) {
                        x[(j, k)] = C64::new(0.0, 0.0);
                    }
                }
            }
            Value::Mat(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaves() {
        let mut ctx = EvalContext::new(&[3.0, 4.0]);
        let z = Frequency::zero(2);
        let v = ctx.eval(&Coeff::jap(1.0), &z).unwrap();
        assert!((v.entry(0, 0).re - 6.0).abs() < 1e-15);
        let h = ctx.eval(&Coeff::hom(2.0), &z).unwrap();
        assert!((h.entry(0, 0).re - 25.0).abs() < 1e-12);
        assert!(ctx.eval(&Coeff::lt(5.0), &z).unwrap().is_zero());
        assert!(!ctx.eval(&Coeff::ge(5.0), &z).unwrap().is_zero());
        let mut origin = EvalContext::new(&[0.0, 0.0]);
        assert_eq!(origin.eval(&Coeff::hom(1.0), &z).unwrap().entry(0, 0).re, 0.0);
    }

    #[test]
    fn indicator_guards_singular_weight() {
        let c = Coeff::product(vec![Coeff::hom(-1.0), Coeff::ge(1.0)]);
        let mut ctx = EvalContext::new(&[0.0, 0.0]);
        assert!(ctx.eval(&c, &Frequency::zero(2)).unwrap().is_zero());
    }

    #[test]
    fn shift_moves_point() {
        let c = Coeff::coord(0).shift(&Frequency::from_f64(&[1.5, 0.0]));
        let mut ctx = EvalContext::new(&[1.0, 2.0]);
        let v = ctx.eval(&c, &Frequency::zero(2)).unwrap();
        assert_eq!(v.entry(0, 0).re, 2.5);
    }
}
