//! The conjugation series and the one-step and parallel weak transforms.

use std::collections::BTreeMap;

use super::bounds::{predicted_bound, BoundKind};
use super::report::{GaugeOptions, GaugeReport, LedgerEntry};
use super::resonance::{build_psi, split_resonant, ResonanceSpec, ResonanceVariant};
use super::GaugeError;
use crate::symbols::norm::norm_auto;
use crate::symbols::{GridSpec, MatrixSymbol, C64};

pub const MAX_SERIES_ORDER: usize = 24;
const TAIL_TARGET: f64 = 1e-9;

/// Σ_{k>K} y^k/k!.
pub fn exp_tail(y: f64, k: usize) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    for j in 1..=k {
        term *= y / j as f64;
    }
    let mut sum = 0.0;
    let mut j = k + 1;
    loop {
        term *= y / j as f64;
        sum += term;
        if term < 1e-18 * sum || j > k + 400 {
            break;
        }
        j += 1;
    }
    sum
}

/// Smallest K ≥ 1 with Σ_{k>K}(2x)^k/k! < 1e-9, capped at 24.
pub fn default_series_order(x: f64) -> usize {
    (1..=MAX_SERIES_ORDER)
        .find(|&k| exp_tail(2.0 * x, k) < TAIL_TARGET)
        .unwrap_or(MAX_SERIES_ORDER)
}

/// Result of truncating the conjugation series at order K.
#[derive(Clone, Debug)]
pub struct Conjugated {
    pub symbol: MatrixSymbol,
    pub order: usize,
    pub tail_bound: f64,
    /// ad^k(a; ψ) for k = 0..=K.
    pub powers: Vec<MatrixSymbol>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

pub(crate) fn ad_powers(a: &MatrixSymbol, psi: &MatrixSymbol, k: usize) -> Result<Vec<MatrixSymbol>, GaugeError> {
    let mut out = vec![a.clone()];
    for _ in 0..k {
        let next = out.last().unwrap().ad(psi)?;
        out.push(next);
    }
    Ok(out)
}

pub(crate) fn series_sum(powers: &[MatrixSymbol], from: usize, to: usize, like: &MatrixSymbol) -> Result<MatrixSymbol, GaugeError> {
    let terms: Vec<(C64, &MatrixSymbol)> = (from..=to.min(powers.len() - 1))
        .map(|k| (C64::new(1.0 / factorial(k), 0.0), &powers[k]))
        .collect();
    if terms.is_empty() {
        return Ok(MatrixSymbol::zero(like.dim(), like.spinor_dim()).with_order(like.order));
    }
    Ok(MatrixSymbol::linear_combine(&terms)?)
}

/// ⟦ψ⟧^0_{|α|}, the quantity driving the series tail.
fn psi_size(psi: &MatrixSymbol, alpha: f64, grid: &GridSpec) -> Result<f64, GaugeError> {
    if psi.is_zero() {
        return Ok(0.0);
    }
    Ok(norm_auto(psi, 0.0, alpha.abs(), grid)?.value)
}

/// Σ_{k=0}^{K} ad^k(a; ψ)/k! with tailBound = ⟦a⟧·Σ_{k>K}(2⟦ψ⟧)^k/k!.
pub fn gauge_conjugate(
    a: &MatrixSymbol,
    psi: &MatrixSymbol,
    k: Option<usize>,
    grid: &GridSpec,
) -> Result<Conjugated, GaugeError> {
    a.check_compatible(psi)?;
    if psi.is_zero() {
        return Ok(Conjugated {
            symbol: a.clone(),
            order: k.unwrap_or(0),
            tail_bound: 0.0,
            powers: vec![a.clone()],
        });
    }
    let x = psi_size(psi, a.order, grid)?;
    let order = k.unwrap_or_else(|| default_series_order(x)).max(1);
    let tail = exp_tail(2.0 * x, order);
    let a_norm = if tail == 0.0 || a.is_zero() {
        0.0
    } else {
        norm_auto(a, a.order, 0.0, grid)?.value
    };
    let powers = ad_powers(a, psi, order)?;
    let symbol = series_sum(&powers, 0, order, a)?;
    Ok(Conjugated {
        symbol,
        order,
        tail_bound: a_norm * tail,
        powers,
    })
}

fn series_order_for(psi: &MatrixSymbol, a: &MatrixSymbol, opts: &GaugeOptions) -> Result<(usize, f64), GaugeError> {
    let x = psi_size(psi, a.order, &opts.grid)?;
    let k = opts.series_order.unwrap_or_else(|| default_series_order(x)).max(1);
    let tail = exp_tail(2.0 * x, k);
    let a_norm = if tail == 0.0 { 0.0 } else { norm_auto(a, a.order, 0.0, &opts.grid)?.value };
    Ok((k, a_norm * tail))
}

/// One weak gauge step: [A]_Ψ = A^D + A^R + R with ad(A^D;Ψ) + A^NR = 0.
pub fn one_step_weak(a: &MatrixSymbol, spec: &ResonanceSpec, opts: &GaugeOptions) -> Result<GaugeReport, GaugeError> {
    let (a_d, a_od) = a.split_diagonal();
    let psi = build_psi(&a_d, &a_od, spec)?;
    let (a_nr, a_r) = split_resonant(&a_od, &a_d, spec)?;
    let (k, tail_bound) = series_order_for(&psi, a, opts)?;
    let powers = ad_powers(a, &psi, k)?;
    let transformed = series_sum(&powers, 0, k, a)?;
    let higher = series_sum(&powers, 2, k, a)?;
    let mut remainder = a_od.ad(&psi)?.add(&higher)?;
    remainder.order = 2.0 * opts.beta - spec.delta;

    let mut warnings = Vec::new();
    if spec.delta <= opts.beta {
        warnings.push(format!(
            "delta = {} <= beta = {}: the remainder is not of lower order than the off-diagonal part",
            spec.delta, opts.beta
        ));
    }
    let mut ledger = Vec::new();
    if opts.ledger {
        let beta = opts.beta;
        let delta = spec.delta;
        let l = opts.l;
        let m = a.spinor_dim();
        let scalar = spec.variant == ResonanceVariant::Scalar;
        let od = LedgerEntry::measure("A_OD", &a_od, beta, l, &opts.grid, None)?;
        let od_shift = norm_auto(&a_od, beta, l + beta.abs() + (beta - delta).abs(), &opts.grid)?;
        let psi_pred = scalar.then(|| {
            predicted_bound(&BoundKind::Psi { s: spec.s, m, od_norm: od.measured.value })
        });
        let r_pred = scalar.then(|| {
            predicted_bound(&BoundKind::Remainder { s: spec.s, m, od_norm: od_shift.value })
        });
        ledger.push(od);
        ledger.push(LedgerEntry::measure("psi", &psi, beta - delta, l, &opts.grid, psi_pred)?);
        ledger.push(LedgerEntry::measure("remainder", &remainder, 2.0 * beta - delta, l, &opts.grid, r_pred)?);
    }

    let mut scalars = BTreeMap::new();
    scalars.insert("delta".into(), spec.delta);
    scalars.insert("s".into(), spec.s);
    Ok(GaugeReport {
        psi,
        transformed,
        parts: vec![
            ("diagonal".into(), a_d),
            ("resonant".into(), a_r),
            ("remainder".into(), remainder),
        ],
        components: vec![("non_resonant".into(), a_nr)],
        series_order: k,
        tail_bound,
        ledger,
        warnings,
        scalars,
    })
}

/// Ordered compositions of n into j positive parts.
pub(crate) fn compositions(n: usize, j: usize) -> Vec<Vec<usize>> {
    if j == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(j - 1) {
        for mut rest in compositions(n - first, j - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Memoized iterated commutators ad(X; Ψ_{k1}, …, Ψ_{kj}).
struct AdCache<'a> {
    base: &'a MatrixSymbol,
    memo: BTreeMap<Vec<usize>, MatrixSymbol>,
}

impl<'a> AdCache<'a> {
    fn new(base: &'a MatrixSymbol) -> Self {
        AdCache { base, memo: BTreeMap::new() }
    }

    fn get(&mut self, seq: &[usize], psis: &[MatrixSymbol]) -> Result<MatrixSymbol, GaugeError> {
        if seq.is_empty() {
            return Ok(self.base.clone());
        }
        if let Some(s) = self.memo.get(seq) {
            return Ok(s.clone());
        }
        let prefix = self.get(&seq[..seq.len() - 1], psis)?;
        let out = prefix.ad(&psis[seq[seq.len() - 1] - 1])?;
        self.memo.insert(seq.to_vec(), out.clone());
        Ok(out)
    }
}

/// Intermediate products of the parallel scheme.
pub(crate) struct ParallelParts {
    pub psis: Vec<MatrixSymbol>,
    pub b: Vec<MatrixSymbol>,
    pub t: Vec<MatrixSymbol>,
    pub psi: MatrixSymbol,
    pub y: MatrixSymbol,
    pub remainder: MatrixSymbol,
    pub transformed: MatrixSymbol,
    pub series_order: usize,
    pub tail_bound: f64,
}

fn weighted_sum(terms: Vec<(f64, MatrixSymbol)>, like: &MatrixSymbol) -> Result<MatrixSymbol, GaugeError> {
    if terms.is_empty() {
        return Ok(MatrixSymbol::zero(like.dim(), like.spinor_dim()));
    }
    let refs: Vec<(C64, &MatrixSymbol)> = terms.iter().map(|(c, s)| (C64::new(*c, 0.0), s)).collect();
    Ok(MatrixSymbol::linear_combine(&refs)?)
}

fn b_level(l: usize, cache: &mut AdCache<'_>, psis: &[MatrixSymbol], like: &MatrixSymbol) -> Result<MatrixSymbol, GaugeError> {
    let mut terms = Vec::new();
    for j in 1..l {
        for seq in compositions(l - 1, j) {
            terms.push((1.0 / factorial(j), cache.get(&seq, psis)?));
        }
    }
    weighted_sum(terms, like)
}

pub(crate) fn parallel_core(
    a: &MatrixSymbol,
    a_d: &MatrixSymbol,
    a_od: &MatrixSymbol,
    spec: &ResonanceSpec,
    k_tilde: usize,
    opts: &GaugeOptions,
) -> Result<ParallelParts, GaugeError> {
    assert!(k_tilde >= 1, "k_tilde must be at least 1");
    let mut od_cache = AdCache::new(a_od);
    let mut d_cache = AdCache::new(a_d);
    let mut psis: Vec<MatrixSymbol> = Vec::new();
    let mut bs: Vec<MatrixSymbol> = Vec::new();
    let mut ts: Vec<MatrixSymbol> = Vec::new();

    for l in 1..=k_tilde {
        let b_l = if l == 1 { a_od.clone() } else { b_level(l, &mut od_cache, &psis, a)? };
        let t_l = if l == 1 {
            MatrixSymbol::zero(a.dim(), a.spinor_dim())
        } else {
            let mut terms = Vec::new();
            for j in 2..=l {
                for seq in compositions(l, j) {
                    terms.push((1.0 / factorial(j), d_cache.get(&seq, &psis)?));
                }
            }
            weighted_sum(terms, a)?
        };
        let rhs = b_l.add(&t_l)?;
        let psi_l = build_psi(a_d, &rhs, spec)?;
        psis.push(psi_l);
        bs.push(b_l);
        ts.push(t_l);
    }
    let b_next = b_level(k_tilde + 1, &mut od_cache, &psis, a)?;

    let psi_refs: Vec<(C64, &MatrixSymbol)> = psis.iter().map(|p| (C64::new(1.0, 0.0), p)).collect();
    let mut psi = MatrixSymbol::linear_combine(&psi_refs)?;
    psi.order = opts.beta - spec.delta;

    let (k_series, tail_bound) = series_order_for(&psi, a, opts)?;
    let k_series = k_series.max(k_tilde);
    let powers = ad_powers(a, &psi, k_series)?;
    let transformed = series_sum(&powers, 0, k_series, a)?;
    let r1 = series_sum(&powers, k_tilde + 1, k_series, a)?;

    let mut r2_terms = Vec::new();
    for j in 1..=k_tilde {
        for total in (k_tilde + 1)..=(j * k_tilde) {
            for seq in compositions(total, j) {
                if seq.iter().all(|&k| k <= k_tilde) {
                    let w = 1.0 / factorial(j);
                    r2_terms.push((w, d_cache.get(&seq, &psis)?));
                    r2_terms.push((w, od_cache.get(&seq, &psis)?));
                }
            }
        }
    }
    let r2 = weighted_sum(r2_terms, a)?;
    let mut remainder = b_next.add(&r1)?.add(&r2)?;
    remainder.order = k_tilde as f64 * (opts.beta - spec.delta) + opts.beta;

    let mut y_terms: Vec<(f64, MatrixSymbol)> = bs.iter().map(|b| (1.0, b.clone())).collect();
    y_terms.extend(ts.iter().skip(1).map(|t| (1.0, t.clone())));
    let mut y = weighted_sum(y_terms, a)?;
    y.order = opts.beta;

    Ok(ParallelParts {
        psis,
        b: bs,
        t: ts,
        psi,
        y,
        remainder,
        transformed,
        series_order: k_series,
        tail_bound,
    })
}

/// Parallel weak transform with Ψ^(k̃) = Σ_{l≤k̃} Ψ_l.
pub fn parallel_transform(
    a: &MatrixSymbol,
    spec: &ResonanceSpec,
    k_tilde: usize,
    opts: &GaugeOptions,
) -> Result<GaugeReport, GaugeError> {
    let (a_d, a_od) = a.split_diagonal();
    let p = parallel_core(a, &a_d, &a_od, spec, k_tilde, opts)?;
    let (y_d, y_od) = p.y.split_diagonal();
    let (_, y_r) = split_resonant(&y_od, &a_d, spec)?;

    let mut warnings = Vec::new();
    if spec.delta <= opts.beta {
        warnings.push(format!(
            "delta = {} <= beta = {}: the remainder order does not improve with k_tilde",
            spec.delta, opts.beta
        ));
    }
    let mut components = Vec::new();
    for (i, s) in p.psis.iter().enumerate() {
        components.push((format!("psi_{}", i + 1), s.clone()));
    }
    for (i, s) in p.b.iter().enumerate() {
        components.push((format!("B_{}", i + 1), s.clone()));
    }
    for (i, s) in p.t.iter().enumerate().skip(1) {
        components.push((format!("T_{}", i + 1), s.clone()));
    }
    let mut ledger = Vec::new();
    if opts.ledger {
        let (beta, delta, l) = (opts.beta, spec.delta, opts.l);
        for (i, s) in p.psis.iter().enumerate() {
            let k = (i + 1) as f64;
            ledger.push(LedgerEntry::measure(&format!("psi_{}", i + 1), s, k * (beta - delta), l, &opts.grid, None)?);
        }
        ledger.push(LedgerEntry::measure("Y", &p.y, beta, l, &opts.grid, None)?);
        ledger.push(LedgerEntry::measure("remainder", &p.remainder, p.remainder.order, l, &opts.grid, None)?);
    }
    let mut scalars = BTreeMap::new();
    scalars.insert("k_tilde".into(), k_tilde as f64);
    scalars.insert("delta".into(), spec.delta);
    Ok(GaugeReport {
        psi: p.psi,
        transformed: p.transformed,
        parts: vec![
            ("diagonal".into(), a_d),
            ("Y_diagonal".into(), y_d),
            ("Y_resonant".into(), y_r),
            ("remainder".into(), p.remainder),
        ],
        components,
        series_order: p.series_order,
        tail_bound: p.tail_bound,
        ledger,
        warnings,
        scalars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tails() {
        assert_eq!(exp_tail(0.0, 3), 0.0);
        let full: f64 = (2.0f64).exp() - 1.0 - 2.0 - 2.0;
        assert!((exp_tail(2.0, 2) - full).abs() < 1e-14);
        assert_eq!(default_series_order(0.0), 1);
        assert!(default_series_order(0.1) < 12);
        assert_eq!(default_series_order(50.0), MAX_SERIES_ORDER);
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(4, 4), vec![vec![1, 1, 1, 1]]);
        assert!(compositions(2, 3).is_empty());
    }
}
