//! Coefficient expressions: an immutable, shareable DAG of nodes.
//!
//! Every constructor canonicalizes its input (constant folding, dropping
//! zero terms, collapsing trivial shifts), so structurally equal inputs
//! produce structurally equal trees. The DSL printer and parser in
//! [`crate::cli::dsl`] rely on this to round-trip exactly.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::freq::Frequency;
use crate::gauge::ResonanceSpec;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

/// Which matrix entries an [`Node::EntryMask`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryPart {
    Diagonal,
    OffDiagonal,
}

/// Which side of a resonance cut-off a [`Node::Resonance`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ResonancePart {
    /// Entries where χ = 1.
    NonResonant,
    /// Entries where χ = 0.
    Resonant,
}

/// Entrywise resonance mask of `inner`, which is the coefficient at frequency `shift`.
#[derive(Clone, Debug)]
pub struct ResonanceMask {
    pub keep: ResonancePart,
    pub inner: Coeff,
    /// The θ = 0 coefficient of the diagonal symbol a^D.
    pub diag: Coeff,
    pub shift: Frequency,
    pub spec: ResonanceSpec,
    pub dim: usize,
}

/// Entry (j,k) = numerator_jk(ξ)·χ_jk / (a_j(θ+ξ) − a_k(ξ)).
#[derive(Clone, Debug)]
pub struct MaskedQuotient {
    pub numerator: Coeff,
    pub diag: Coeff,
    pub shift: Frequency,
    pub spec: ResonanceSpec,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub enum Node {
    Zero,
    Scalar(C64),
    Const(CMat),
    /// ⟨ξ⟩^γ
    Jap(f64),
    /// |ξ|^γ, taken as 0 at ξ = 0 when γ > 0.
    Hom(f64),
    /// ξ_j (zero-based axis).
    Coord(usize),
    /// 1 when |ξ| ≥ r.
    Ge(f64),
    /// 1 when |ξ| < r.
    Lt(f64),
    Sum(Vec<Coeff>),
    /// Ordered product; scalar-valued factors commute with everything.
    Product(Vec<Coeff>),
    /// inner(ξ + θ)
    Shift(Frequency, Coeff),
    /// Pointwise conjugate transpose.
    Adjoint(Coeff),
    EntryMask(EntryPart, Coeff),
    Resonance(ResonanceMask),
    Quotient(MaskedQuotient),
}

#[derive(Debug)]
pub struct NodeData {
    pub node: Node,
    scalar: bool,
}

/// A shared handle to an expression node.
#[derive(Clone, Debug)]
pub struct Coeff(Arc<NodeData>);

fn is_zero_c(c: C64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

fn is_one_c(c: C64) -> bool {
    c.re == 1.0 && c.im == 0.0
}

impl Coeff {
    fn wrap(node: Node, scalar: bool) -> Coeff {
        Coeff(Arc::new(NodeData { node, scalar }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Address used as a memoization key during evaluation.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Coeff) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// True when the node evaluates to a multiple of the identity everywhere.
    pub fn is_scalar_valued(&self) -> bool {
        self.0.scalar
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Zero)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.node(), Node::Zero | Node::Scalar(_) | Node::Const(_))
    }

    pub fn zero() -> Coeff {
        Coeff::wrap(Node::Zero, true)
    }

    pub fn one() -> Coeff {
        Coeff::scalar(C64::new(1.0, 0.0))
    }

    pub fn scalar(c: C64) -> Coeff {
        if is_zero_c(c) {
            Coeff::zero()
        } else {
            Coeff::wrap(Node::Scalar(c), true)
        }
    }

    pub fn real(x: f64) -> Coeff {
        Coeff::scalar(C64::new(x, 0.0))
    }

    pub fn constant(m: CMat) -> Coeff {
        if m.iter().all(|c| is_zero_c(*c)) {
            Coeff::zero()
        } else if m.nrows() == 1 && m.ncols() == 1 {
            Coeff::scalar(m[(0, 0)])
        } else {
            Coeff::wrap(Node::Const(m), false)
        }
    }

    pub fn jap(gamma: f64) -> Coeff {
        if gamma == 0.0 {
            Coeff::one()
        } else {
            Coeff::wrap(Node::Jap(gamma), true)
        }
    }

    pub fn hom(gamma: f64) -> Coeff {
        if gamma == 0.0 {
            Coeff::one()
        } else {
            Coeff::wrap(Node::Hom(gamma), true)
        }
    }

    pub fn coord(axis: usize) -> Coeff {
        Coeff::wrap(Node::Coord(axis), true)
    }

    pub fn ge(r: f64) -> Coeff {
        if r <= 0.0 {
            Coeff::one()
        } else {
            Coeff::wrap(Node::Ge(r), true)
        }
    }

    pub fn lt(r: f64) -> Coeff {
        if r <= 0.0 {
            Coeff::zero()
        } else {
            Coeff::wrap(Node::Lt(r), true)
        }
    }

    /// Sum with zero terms dropped and constant terms folded together.
    pub fn sum(terms: Vec<Coeff>) -> Coeff {
        let mut out: Vec<Coeff> = Vec::with_capacity(terms.len());
        let mut konst: Option<(usize, Coeff)> = None;
        for t in terms {
            if t.is_zero() {
                continue;
            }
            if t.is_constant() {
                konst = Some(match konst {
                    None => {
                        out.push(Coeff::zero());
                        (out.len() - 1, t)
                    }
                    Some((pos, acc)) => (pos, add_constants(&acc, &t)),
                });
                continue;
            }
            out.push(t);
        }
        if let Some((pos, acc)) = konst {
            if acc.is_zero() {
                out.remove(pos);
            } else {
                out[pos] = acc;
            }
        }
        match out.len() {
            0 => Coeff::zero(),
            1 => out.pop().unwrap(),
            _ => {
                let scalar = out.iter().all(|c| c.is_scalar_valued());
                Coeff::wrap(Node::Sum(out), scalar)
            }
        }
    }

    /// Ordered product with scalar literals folded into one factor.
    pub fn product(factors: Vec<Coeff>) -> Coeff {
        let mut c = C64::new(1.0, 0.0);
        let mut rest: Vec<Coeff> = Vec::with_capacity(factors.len());
        for f in factors {
            match f.node() {
                Node::Zero => return Coeff::zero(),
                Node::Scalar(s) => c *= *s,
                Node::Const(m) => {
                    if let Some(Node::Const(prev)) = rest.last().map(|p| p.node()) {
                        let merged = prev * m;
                        rest.pop();
                        if merged.iter().all(|z| is_zero_c(*z)) {
                            return Coeff::zero();
                        }
                        rest.push(Coeff::wrap(Node::Const(merged), false));
                    } else {
                        rest.push(f.clone());
                    }
                }
                _ => rest.push(f.clone()),
            }
        }
        if is_zero_c(c) {
            return Coeff::zero();
        }
        if !is_one_c(c) {
            let mut absorbed = false;
            for idx in 0..rest.len() {
                if let Node::Const(m) = rest[idx].node() {
                    let scaled = m.map(|z| z * c);
                    rest[idx] = Coeff::wrap(Node::Const(scaled), false);
                    absorbed = true;
                    break;
                }
                if !rest[idx].is_scalar_valued() {
                    break;
                }
            }
            if !absorbed {
                rest.insert(0, Coeff::scalar(c));
            }
        }
        match rest.len() {
            0 => Coeff::scalar(c),
            1 => rest.pop().unwrap(),
            _ => {
                let scalar = rest.iter().all(|f| f.is_scalar_valued());
                Coeff::wrap(Node::Product(rest), scalar)
            }
        }
    }

    pub fn scale(&self, c: C64) -> Coeff {
        Coeff::product(vec![Coeff::scalar(c), self.clone()])
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        Coeff::sum(vec![self.clone(), other.clone()])
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        Coeff::product(vec![self.clone(), other.clone()])
    }

    /// ξ ↦ self(ξ + θ).
    pub fn shift(&self, theta: &Frequency) -> Coeff {
        if theta.is_zero() || self.is_constant() {
            return self.clone();
        }
        if let Node::Shift(phi, inner) = self.node() {
            let total = theta + phi;
            return inner.shift(&total);
        }
        Coeff::wrap(Node::Shift(theta.clone(), self.clone()), self.is_scalar_valued())
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Coeff {
        match self.node() {
            Node::Zero
            | Node::Jap(_)
            | Node::Hom(_)
            | Node::Coord(_)
            | Node::Ge(_)
            | Node::Lt(_) => self.clone(),
            Node::Scalar(c) => Coeff::scalar(c.conj()),
            Node::Const(m) => Coeff::wrap(Node::Const(m.adjoint()), false),
            Node::Adjoint(inner) => inner.clone(),
            _ => Coeff::wrap(Node::Adjoint(self.clone()), self.is_scalar_valued()),
        }
    }

    pub fn entry_mask(&self, part: EntryPart) -> Coeff {
        if self.is_scalar_valued() {
            return match part {
                EntryPart::Diagonal => self.clone(),
                EntryPart::OffDiagonal => Coeff::zero(),
            };
        }
        match self.node() {
            Node::Const(m) => {
                let mut out = m.clone();
                for j in 0..out.nrows() {
                    for k in 0..out.ncols() {
                        if (j == k) != (part == EntryPart::Diagonal) {
                            out[(j, k)] = C64::new(0.0, 0.0);
                        }
                    }
                }
                Coeff::constant(out)
            }
            Node::EntryMask(p, _) if *p == part => self.clone(),
            Node::EntryMask(_, _) => Coeff::zero(),
            _ => Coeff::wrap(Node::EntryMask(part, self.clone()), false),
        }
    }

    pub fn resonance(mask: ResonanceMask) -> Coeff {
        if mask.inner.is_zero() {
            return Coeff::zero();
        }
        let scalar = mask.dim == 1;
        Coeff::wrap(Node::Resonance(mask), scalar)
    }

    pub fn quotient(q: MaskedQuotient) -> Coeff {
        if q.numerator.is_zero() {
            return Coeff::zero();
        }
        let scalar = q.dim == 1;
        Coeff::wrap(Node::Quotient(q), scalar)
    }

    /// Number of distinct nodes reachable from this one.
    pub fn node_count(&self) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![self.clone()];
        while let Some(c) = stack.pop() {
            if !seen.insert(c.id()) {
                continue;
            }
            for ch in c.children() {
                stack.push(ch.clone());
            }
        }
        seen.len()
    }

    pub fn children(&self) -> Vec<&Coeff> {
        match self.node() {
            Node::Sum(v) | Node::Product(v) => v.iter().collect(),
            Node::Shift(_, c) | Node::Adjoint(c) | Node::EntryMask(_, c) => vec![c],
            Node::Resonance(r) => vec![&r.inner, &r.diag],
            Node::Quotient(q) => vec![&q.numerator, &q.diag],
            _ => vec![],
        }
    }

    /// True when some node below this one carries a resonance cut-off.
    pub fn has_gauge_nodes(&self) -> bool {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![self.clone()];
        while let Some(c) = stack.pop() {
            if !seen.insert(c.id()) {
                continue;
            }
            if matches!(c.node(), Node::Resonance(_) | Node::Quotient(_)) {
                return true;
            }
            for ch in c.children() {
                stack.push(ch.clone());
            }
        }
        false
    }
}

fn add_constants(a: &Coeff, b: &Coeff) -> Coeff {
    match (a.node(), b.node()) {
        (Node::Zero, _) => b.clone(),
        (_, Node::Zero) => a.clone(),
        (Node::Scalar(x), Node::Scalar(y)) => Coeff::scalar(x + y),
        (Node::Const(m), Node::Scalar(y)) | (Node::Scalar(y), Node::Const(m)) => {
            let mut out = m.clone();
            for j in 0..out.nrows().min(out.ncols()) {
                out[(j, j)] += y;
            }
            Coeff::constant(out)
        }
        (Node::Const(m), Node::Const(n)) => Coeff::constant(m + n),
        _ => unreachable!("add_constants on non-constant nodes"),
    }
}

/// Structural equality with exact float comparison; used by round-trip tests.
impl PartialEq for Coeff {
    fn eq(&self, other: &Coeff) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Zero, Node::Zero) => true,
            (Node::Scalar(a), Node::Scalar(b)) => a == b,
            (Node::Const(a), Node::Const(b)) => a == b,
            (Node::Jap(a), Node::Jap(b))
            | (Node::Hom(a), Node::Hom(b))
            | (Node::Ge(a), Node::Ge(b))
            | (Node::Lt(a), Node::Lt(b)) => a == b,
            (Node::Coord(a), Node::Coord(b)) => a == b,
            (Node::Sum(a), Node::Sum(b)) | (Node::Product(a), Node::Product(b)) => a == b,
            (Node::Shift(t, a), Node::Shift(u, b)) => t == u && a == b,
            (Node::Adjoint(a), Node::Adjoint(b)) => a == b,
            (Node::EntryMask(p, a), Node::EntryMask(q, b)) => p == q && a == b,
            (Node::Resonance(a), Node::Resonance(b)) => {
                a.keep == b.keep
                    && a.shift == b.shift
                    && a.spec == b.spec
                    && a.inner == b.inner
                    && a.diag == b.diag
            }
            (Node::Quotient(a), Node::Quotient(b)) => {
                a.shift == b.shift
                    && a.spec == b.spec
                    && a.numerator == b.numerator
                    && a.diag == b.diag
            }
            _ => false,
        }
    }
}
