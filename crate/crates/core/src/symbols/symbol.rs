use std::collections::BTreeMap;

use super::eval::{EvalContext, Value};
use super::expr::{Coeff, CMat, EntryPart, C64};
use super::freq::Frequency;
use super::SymbolError;

/// A finite map θ ↦ b_θ(·) of m×m coefficient expressions on ℝᵈ.
#[derive(Clone, Debug)]
pub struct MatrixSymbol {
    d: usize,
    m: usize,
    entries: BTreeMap<Frequency, Coeff>,
    /// Declared order γ.
    pub order: f64,
}

fn mismatch(what: &str, a: usize, b: usize) -> SymbolError {
    SymbolError::DimensionMismatch {
        expected: format!("{what}={a}"),
        found: format!("{what}={b}"),
    }
}

impl MatrixSymbol {
    pub fn zero(d: usize, m: usize) -> Self {
        MatrixSymbol {
            d,
            m,
            entries: BTreeMap::new(),
            order: 0.0,
        }
    }

    pub fn identity(d: usize, m: usize) -> Self {
        Self::zero(d, m).with_entry(Frequency::zero(d), Coeff::one())
    }

    /// A single coefficient at θ = 0.
    pub fn principal(d: usize, m: usize, c: Coeff) -> Self {
        Self::zero(d, m).with_entry(Frequency::zero(d), c)
    }

    /// Adds `c` to the coefficient at θ.
    pub fn with_entry(mut self, theta: Frequency, c: Coeff) -> Self {
        self.add_entry(theta, c);
        self
    }

    pub fn with_order(mut self, order: f64) -> Self {
        self.order = order;
        self
    }

    pub fn add_entry(&mut self, theta: Frequency, c: Coeff) {
        assert_eq!(theta.dim(), self.d, "frequency dimension");
        let merged = match self.entries.remove(&theta) {
            Some(prev) => prev.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.entries.insert(theta, merged);
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn spinor_dim(&self) -> usize {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coeff(&self, theta: &Frequency) -> Option<&Coeff> {
        self.entries.get(theta)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Frequency, &Coeff)> {
        self.entries.iter()
    }

    pub fn frequencies(&self) -> Vec<Frequency> {
        self.entries.keys().cloned().collect()
    }

    /// max |θ| over the support; 0 for the zero symbol.
    pub fn reach(&self) -> f64 {
        self.entries.keys().map(|t| t.norm()).fold(0.0, f64::max)
    }

    /// True when the support contains 0 and is closed under negation.
    pub fn has_symmetric_support(&self) -> bool {
        self.entries.contains_key(&Frequency::zero(self.d))
            && self.entries.keys().all(|t| self.entries.contains_key(&(-t)))
    }

    pub fn check_compatible(&self, other: &MatrixSymbol) -> Result<(), SymbolError> {
        if self.d != other.d {
            return Err(mismatch("d", self.d, other.d));
        }
        if self.m != other.m {
            return Err(mismatch("m", self.m, other.m));
        }
        Ok(())
    }

    /// b_θ(ξ) as an m×m matrix; zero when θ is off the support.
    pub fn eval(&self, theta: &Frequency, xi: &[f64]) -> Result<CMat, SymbolError> {
        let mut ctx = EvalContext::new(xi);
        Ok(self.eval_in(&mut ctx, theta)?.to_matrix(self.m))
    }

    /// b_θ at the context's base point, reusing its cache.
    pub fn eval_in(&self, ctx: &mut EvalContext, theta: &Frequency) -> Result<Value, SymbolError> {
        match self.entries.get(theta) {
            Some(c) => ctx.eval(c, &Frequency::zero(self.d)),
            None => Ok(Value::Zero),
        }
    }

    /// Evaluates b_θ at ξ + offset.
    pub fn eval_offset(
        &self,
        ctx: &mut EvalContext,
        theta: &Frequency,
        offset: &Frequency,
    ) -> Result<Value, SymbolError> {
        match self.entries.get(theta) {
            Some(c) => ctx.eval(c, offset),
            None => Ok(Value::Zero),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Frequency, &Coeff) -> Coeff) -> MatrixSymbol {
        let mut out = MatrixSymbol::zero(self.d, self.m).with_order(self.order);
        for (t, c) in &self.entries {
            out.add_entry(t.clone(), f(t, c));
        }
        out
    }

    pub fn scale(&self, c: C64) -> MatrixSymbol {
        self.map_coeffs(|_, x| x.scale(c))
    }

    /// (a∘b)_θ(ξ) = Σ_{θa+θb=θ} a_θa(θb+ξ) b_θb(ξ).
    pub fn compose(&self, other: &MatrixSymbol) -> Result<MatrixSymbol, SymbolError> {
        self.check_compatible(other)?;
        let mut groups: BTreeMap<Frequency, Vec<Coeff>> = BTreeMap::new();
        for (ta, ca) in &self.entries {
            for (tb, cb) in &other.entries {
                let term = Coeff::product(vec![ca.shift(tb), cb.clone()]);
                if !term.is_zero() {
                    groups.entry(ta + tb).or_default().push(term);
                }
            }
        }
        let mut out = MatrixSymbol::zero(self.d, self.m).with_order(self.order + other.order);
        for (t, terms) in groups {
            out.add_entry(t, Coeff::sum(terms));
        }
        Ok(out)
    }

    /// b†_θ(ξ) = b_{−θ}(θ+ξ)*.
    pub fn adjoint(&self) -> MatrixSymbol {
        let mut out = MatrixSymbol::zero(self.d, self.m).with_order(self.order);
        for (phi, c) in &self.entries {
            let theta = -phi;
            out.add_entry(theta.clone(), c.shift(&theta).adjoint());
        }
        out
    }

    /// Σ c_i·s_i with the union of the supports.
    pub fn linear_combine(terms: &[(C64, &MatrixSymbol)]) -> Result<MatrixSymbol, SymbolError> {
        let first = terms
            .first()
            .expect("linear_combine needs at least one term")
            .1;
        let mut groups: BTreeMap<Frequency, Vec<Coeff>> = BTreeMap::new();
        let mut order = f64::NEG_INFINITY;
        for (c, s) in terms {
            first.check_compatible(s)?;
            order = order.max(s.order);
            for (t, x) in &s.entries {
                groups.entry(t.clone()).or_default().push(x.scale(*c));
            }
        }
        let mut out = MatrixSymbol::zero(first.d, first.m).with_order(order);
        for (t, xs) in groups {
            out.add_entry(t, Coeff::sum(xs));
        }
        Ok(out)
    }

    pub fn add(&self, other: &MatrixSymbol) -> Result<MatrixSymbol, SymbolError> {
        let one = C64::new(1.0, 0.0);
        Self::linear_combine(&[(one, self), (one, other)])
    }

    pub fn sub(&self, other: &MatrixSymbol) -> Result<MatrixSymbol, SymbolError> {
        Self::linear_combine(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    /// ad(a, b) = i(a∘b − b∘a).
    pub fn ad(&self, other: &MatrixSymbol) -> Result<MatrixSymbol, SymbolError> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        let i = C64::new(0.0, 1.0);
        let mut out = Self::linear_combine(&[(i, &ab), (-i, &ba)])?;
        out.order = self.order + other.order;
        Ok(out)
    }

    /// ad(a; b₁,…,b_k) = ad(ad(a; b₁,…,b_{k−1}), b_k).
    pub fn ad_iter(&self, bs: &[&MatrixSymbol]) -> Result<MatrixSymbol, SymbolError> {
        let mut acc = self.clone();
        for b in bs {
            acc = acc.ad(b)?;
        }
        Ok(acc)
    }

    /// (b_D, b_OD): b_D is the matrix diagonal of the θ = 0 coefficient.
    pub fn split_diagonal(&self) -> (MatrixSymbol, MatrixSymbol) {
        let zero = Frequency::zero(self.d);
        let mut diag = MatrixSymbol::zero(self.d, self.m).with_order(self.order);
        let mut off = MatrixSymbol::zero(self.d, self.m).with_order(self.order);
        for (t, c) in &self.entries {
            if *t == zero {
                diag.add_entry(t.clone(), c.entry_mask(EntryPart::Diagonal));
                off.add_entry(t.clone(), c.entry_mask(EntryPart::OffDiagonal));
            } else {
                off.add_entry(t.clone(), c.clone());
            }
        }
        (diag, off)
    }

    /// (b_U, b_C): matrix-diagonal and off-diagonal entries at every θ.
    pub fn split_uncoupled(&self) -> (MatrixSymbol, MatrixSymbol) {
        (
            self.entry_masked(EntryPart::Diagonal),
            self.entry_masked(EntryPart::OffDiagonal),
        )
    }

    pub fn entry_masked(&self, part: EntryPart) -> MatrixSymbol {
        self.map_coeffs(|_, c| c.entry_mask(part))
    }

    /// Drops the listed frequencies; returns (kept, dropped).
    pub fn partition(&self, keep: impl Fn(&Frequency) -> bool) -> (MatrixSymbol, MatrixSymbol) {
        let mut a = MatrixSymbol::zero(self.d, self.m).with_order(self.order);
        let mut b = MatrixSymbol::zero(self.d, self.m).with_order(self.order);
        for (t, c) in &self.entries {
            if keep(t) {
                a.add_entry(t.clone(), c.clone());
            } else {
                b.add_entry(t.clone(), c.clone());
            }
        }
        (a, b)
    }

    /// Max over θ ∈ Θ ∪ (−Θ) of ‖b_θ(ξ) − b†_θ(ξ)‖ at the given points.
    pub fn symmetry_defect(&self, points: &[Vec<f64>]) -> Result<f64, SymbolError> {
        let adj = self.adjoint();
        let mut thetas: Vec<Frequency> = self.frequencies();
        thetas.extend(adj.frequencies());
        thetas.sort();
        thetas.dedup();
        let mut worst: f64 = 0.0;
        for p in points {
            let mut c1 = EvalContext::new(p);
            let mut c2 = EvalContext::new(p);
            for t in &thetas {
                let a = self.eval_in(&mut c1, t)?.to_matrix(self.m);
                let b = adj.eval_in(&mut c2, t)?.to_matrix(self.m);
                let diff = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
                worst = worst.max(diff);
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: &[f64]) -> Frequency {
        Frequency::from_f64(v)
    }

    #[test]
    fn eval_single_frequency() {
        let s = MatrixSymbol::zero(2, 2).with_entry(f(&[1.0, 0.0]), Coeff::jap(-1.0).scale(C64::new(2.0, 0.0)));
        let v = s.eval(&f(&[1.0, 0.0]), &[2.0, 0.0]).unwrap();
        assert!((v[(0, 0)].re - 2.0 / 3.0).abs() < 1e-15);
        assert!((v[(1, 1)].re - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(v[(0, 1)].norm(), 0.0);
        let off = s.eval(&f(&[0.0, 1.0]), &[2.0, 0.0]).unwrap();
        assert_eq!(off.norm(), 0.0);
    }

    #[test]
    fn compose_examples() {
        let a = MatrixSymbol::zero(2, 1).with_entry(f(&[1.0, 0.0]), Coeff::one());
        let b = MatrixSymbol::zero(2, 1).with_entry(f(&[0.0, 1.0]), Coeff::jap(1.0));
        let c = a.compose(&b).unwrap();
        assert_eq!(c.frequencies(), vec![f(&[1.0, 1.0])]);
        assert_eq!(c.eval(&f(&[1.0, 1.0]), &[0.0, 0.0]).unwrap()[(0, 0)].re, 1.0);
        let aa = a.compose(&a).unwrap();
        assert_eq!(aa.frequencies(), vec![f(&[2.0, 0.0])]);
        assert_eq!(aa.eval(&f(&[2.0, 0.0]), &[0.3, -1.0]).unwrap()[(0, 0)].re, 1.0);
    }

    #[test]
    fn adjoint_example() {
        let b = MatrixSymbol::zero(2, 1).with_entry(f(&[1.0, 0.0]), Coeff::jap(1.0).scale(C64::new(0.0, 1.0)));
        let a = b.adjoint();
        assert_eq!(a.frequencies(), vec![f(&[-1.0, 0.0])]);
        let v = a.eval(&f(&[-1.0, 0.0]), &[1.0, 0.0]).unwrap()[(0, 0)];
        assert!((v - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn commutator_examples() {
        let a = MatrixSymbol::principal(2, 1, Coeff::jap(1.0));
        let b = MatrixSymbol::zero(2, 1).with_entry(f(&[1.0, 0.0]), Coeff::one());
        let v = a.ad(&b).unwrap().eval(&f(&[1.0, 0.0]), &[2.0, 0.0]).unwrap()[(0, 0)];
        assert!((v - C64::new(0.0, 1.0)).norm() < 1e-14);
        assert!(a.ad(&a).unwrap().is_zero() || a.ad(&a).unwrap().eval(&f(&[0.0, 0.0]), &[1.0, 2.0]).unwrap().norm() == 0.0);
    }

    #[test]
    fn linear_combine_cancels() {
        let b = MatrixSymbol::zero(2, 1).with_entry(f(&[1.0, 0.0]), Coeff::jap(1.0));
        let z = MatrixSymbol::linear_combine(&[(C64::new(1.0, 0.0), &b), (C64::new(-1.0, 0.0), &b)]).unwrap();
        assert_eq!(z.eval(&f(&[1.0, 0.0]), &[0.2, 0.1]).unwrap()[(0, 0)].norm(), 0.0);
    }
}
