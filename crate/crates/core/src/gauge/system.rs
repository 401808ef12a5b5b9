//! Uncoupling of matrix systems with separated principal exponents.

use std::collections::BTreeMap;

use super::bounds::{predicted_bound, BoundKind};
use super::report::{GaugeOptions, GaugeReport, LedgerEntry};
use super::resonance::{build_psi, diagonal_coeff, split_resonant, ResonanceSpec, ResonanceVariant};
use super::transform::{ad_powers, gauge_conjugate, parallel_core, series_sum};
use super::GaugeError;
use crate::numeric::logspace;
use crate::symbols::norm::{directions, norm_auto};
use crate::symbols::{weight, Coeff, EntryPart, EvalContext, Frequency, MatrixSymbol};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UncoupleMode {
    OneStep,
    /// Parallel scheme pushing the coupled remainder to order −N.
    Full(u32),
}

/// Splits off ±θ pairs beyond `radius`, largest |θ| first, while the
/// cumulative dropped norm stays below `eps`.
fn trim(
    a: &MatrixSymbol,
    radius: Option<f64>,
    eps: f64,
    beta: f64,
    opts: &GaugeOptions,
) -> Result<(MatrixSymbol, MatrixSymbol, f64), GaugeError> {
    let empty = MatrixSymbol::zero(a.dim(), a.spinor_dim());
    let Some(radius) = radius else {
        return Ok((a.clone(), empty, 0.0));
    };
    let mut reps: Vec<Frequency> = a
        .frequencies()
        .into_iter()
        .filter(|t| !t.is_zero() && t.norm() > radius)
        .map(|t| {
            let n = -&t;
            if n > t {
                n
            } else {
                t
            }
        })
        .collect();
    reps.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then_with(|| x.cmp(y)));
    reps.dedup();
    let mut dropped: Vec<Frequency> = Vec::new();
    let mut total = 0.0;
    for r in reps {
        let pair = a.partition(|t| *t == r || *t == -&r).0;
        let n = norm_auto(&pair, beta, 0.0, &opts.grid)?.value;
        if total + n >= eps {
            break;
        }
        total += n;
        dropped.push(-&r);
        dropped.push(r);
    }
    let (kept, gone) = a.partition(|t| !dropped.contains(t));
    Ok((kept, gone, total))
}

/// Smallest r ≥ 1 such that |a_j(θ+ξ) − a_k(ξ)| > (c/2)⟨ξ⟩^α on all sampled
/// ξ with ⟨ξ⟩, ⟨θ+ξ⟩ > r, for every retained θ and coupling pair.
fn separation_radius(
    diag: &Coeff,
    thetas: &[Frequency],
    pairs: &[(usize, usize)],
    c: f64,
    alpha: f64,
    d: usize,
    m: usize,
) -> Result<f64, GaugeError> {
    let dirs = directions(d, if d == 2 { 32 } else { 64 }, 11);
    let zero = Frequency::zero(d);
    let ok = |r: f64| -> Result<bool, GaugeError> {
        for w in logspace(r.max(1.0) * 1.0001, (100.0 * r).max(1e4), 40) {
            for u in &dirs {
                let xi: Vec<f64> = u.iter().map(|x| x * (w - 1.0)).collect();
                let mut ctx = EvalContext::new(&xi);
                let here = ctx.eval(diag, &zero)?.diag_real(m);
                for t in thetas {
                    let shifted: Vec<f64> = xi.iter().enumerate().map(|(i, x)| x + t.component(i)).collect();
                    if weight(&shifted) <= r {
                        continue;
                    }
                    let there = ctx.eval(diag, t)?.diag_real(m);
                    for &(j, k) in pairs {
                        if (there[j] - here[k]).abs() <= 0.5 * c * w.powf(alpha) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    };
    if ok(1.0)? {
        return Ok(1.0);
    }
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    while !ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e7 {
            return Err(GaugeError::SeparationRadiusNotFound(hi));
        }
    }
    for _ in 0..40 {
        let mid = (lo * hi).sqrt();
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    Ok(hi)
}

/// Uncouples `a` into A^D + Y + R₁ + R₂ with Y matrix-diagonal at every θ.
///
/// `exponents` are the constants a_j of the principal part a_j⟨ξ⟩^α; they fix
/// the coupling pairs and the separation constant. The actual diagonal
/// symbol of `a` is used for the cut-offs.
pub fn uncouple_system(
    a: &MatrixSymbol,
    exponents: &[f64],
    alpha: f64,
    spec: &ResonanceSpec,
    mode: UncoupleMode,
    eps_trim: f64,
    opts: &GaugeOptions,
) -> Result<GaugeReport, GaugeError> {
    let m = a.spinor_dim();
    let d = a.dim();
    if exponents.len() != m {
        return Err(GaugeError::Symbol(crate::symbols::SymbolError::DimensionMismatch {
            expected: format!("{m} exponents"),
            found: format!("{}", exponents.len()),
        }));
    }
    let mut pairs = Vec::new();
    let mut c = f64::INFINITY;
    for j in 0..m {
        for k in 0..m {
            if j == k {
                continue;
            }
            let gap = (exponents[j] - exponents[k]).abs();
            if gap == 0.0 {
                if let UncoupleMode::Full(_) = mode {
                    return Err(GaugeError::DegenerateSeparation(format!("a_{j} = a_{k} = {}", exponents[j])));
                }
                continue;
            }
            c = c.min(gap);
            pairs.push((j, k));
        }
    }

    let (a_d, _) = a.split_diagonal();
    let diag = diagonal_coeff(&a_d)?;
    let (kept, dropped, dropped_norm) = trim(a, opts.trim_radius, eps_trim, opts.beta, opts)?;
    let (_, kept_od) = kept.split_diagonal();
    let thetas = kept_od.frequencies();
    let s_prime = if pairs.is_empty() {
        1.0
    } else {
        separation_radius(&diag, &thetas, &pairs, c, alpha, d, m)?
    };
    let variant = match mode {
        UncoupleMode::OneStep => ResonanceVariant::SystemOneStep {
            s_prime,
            pairs: Some(pairs.clone()),
        },
        UncoupleMode::Full(_) => ResonanceVariant::SystemFull { s_prime },
    };
    let sys = ResonanceSpec {
        delta: alpha,
        ..spec.clone()
    }
    .with_variant(variant);

    let mut scalars = BTreeMap::new();
    scalars.insert("s_prime".into(), s_prime);
    scalars.insert("separation".into(), if c.is_finite() { c } else { 0.0 });
    scalars.insert("trimmed_norm".into(), dropped_norm);
    scalars.insert("trimmed_frequencies".into(), dropped.frequencies().len() as f64);
    let mut warnings = Vec::new();
    for j in 0..m {
        for k in 0..m {
            if j != k && exponents[j] == exponents[k] {
                warnings.push(format!(
                    "pair ({j},{k}) has equal exponents; its coupling is kept in the remainder and assumed of order 2beta-alpha"
                ));
            }
        }
    }

    let (psi, k, tail, y, r1, order_r1, conj_kept) = match mode {
        UncoupleMode::OneStep => {
            let psi = build_psi(&a_d, &kept_od, &sys)?;
            let (_, kept_r) = split_resonant(&kept_od, &a_d, &sys)?;
            let conj = gauge_conjugate(&kept, &psi, opts.series_order, &opts.grid)?;
            let k = conj.order;
            let powers = if conj.powers.len() > 1 { conj.powers.clone() } else { ad_powers(&kept, &psi, k)? };
            let higher = series_sum(&powers, 2, k, &kept)?;
            let r = kept_od.ad(&psi)?.add(&higher)?;
            let y = kept_r.entry_masked(EntryPart::Diagonal);
            let r1 = kept_r.entry_masked(EntryPart::OffDiagonal).add(&r)?;
            (psi, k, conj.tail_bound, y, r1, 2.0 * opts.beta - alpha, conj.symbol)
        }
        UncoupleMode::Full(n) => {
            let k_tilde = (((n as f64) + opts.beta) / (alpha - opts.beta)).ceil().max(1.0) as usize;
            scalars.insert("k_tilde".into(), k_tilde as f64);
            let p = parallel_core(&kept, &a_d, &kept_od, &sys, k_tilde, opts)?;
            let (y_d, y_od) = p.y.split_diagonal();
            let (_, y_r) = split_resonant(&y_od, &a_d, &sys)?;
            let y_sum = y_d.add(&y_r)?;
            let y = y_sum.entry_masked(EntryPart::Diagonal);
            let r1 = p.remainder.add(&y_sum.entry_masked(EntryPart::OffDiagonal))?;
            let order = k_tilde as f64 * (opts.beta - alpha) + opts.beta;
            (p.psi, p.series_order, p.tail_bound, y, r1, order, p.transformed)
        }
    };
    let r2 = if dropped.is_zero() {
        MatrixSymbol::zero(d, m)
    } else {
        gauge_conjugate(&dropped, &psi, Some(k), &opts.grid)?.symbol
    };
    let mut y = y;
    y.order = opts.beta;
    let mut r1 = r1;
    r1.order = order_r1;
    let transformed = if dropped.is_zero() { conj_kept } else { conj_kept.add(&r2)? };

    let mut ledger = Vec::new();
    if opts.ledger {
        ledger.push(LedgerEntry::measure("R1", &r1, order_r1, opts.l, &opts.grid, None)?);
        if !dropped.is_zero() {
            let psi0 = norm_auto(&psi, 0.0, opts.beta.abs(), &opts.grid)?.value;
            let pred = predicted_bound(&BoundKind::Conjugated { norm: dropped_norm, psi_norm: psi0 });
            ledger.push(LedgerEntry::measure("R2", &r2, opts.beta, 0.0, &opts.grid, Some(pred))?);
        }
    }
    Ok(GaugeReport {
        psi,
        transformed,
        parts: vec![
            ("diagonal".into(), a_d),
            ("Y".into(), y),
            ("R1".into(), r1),
            ("R2".into(), r2),
        ],
        components: vec![("trimmed".into(), dropped)],
        series_order: k,
        tail_bound: tail,
        ledger,
        warnings,
        scalars,
    })
}
