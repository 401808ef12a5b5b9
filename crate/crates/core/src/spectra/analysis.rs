//! Counting functions, the overlap function and perturbation brackets on a
//! band table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bands::BandTable;
use super::SpectraError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    /// [0, λ).
    pub fn positive(lambda: f64) -> Self {
        Interval { lo: 0.0, hi: lambda, lo_closed: true, hi_closed: false }
    }

    /// (−λ, 0].
    pub fn negative(lambda: f64) -> Self {
        Interval { lo: -lambda, hi: 0.0, lo_closed: false, hi_closed: true }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Number of entries of an ascending list inside the interval.
    pub fn count(&self, sorted: &[f64]) -> usize {
        if self.is_empty() {
            return 0;
        }
        let start = if self.lo_closed {
            sorted.partition_point(|&x| x < self.lo)
        } else {
            sorted.partition_point(|&x| x <= self.lo)
        };
        let end = if self.hi_closed {
            sorted.partition_point(|&x| x <= self.hi)
        } else {
            sorted.partition_point(|&x| x < self.hi)
        };
        end.saturating_sub(start)
    }

    /// [lo − ε, hi + ε]; negative ε shrinks.
    pub fn inflate(&self, eps: f64) -> Self {
        Interval { lo: self.lo - eps, hi: self.hi + eps, ..*self }
    }
}

fn check_trusted(table: &BandTable, lo: f64, hi: f64) -> Result<(), SpectraError> {
    if lo < -table.window || hi > table.window {
        return Err(SpectraError::UntrustedWindow { lo, hi, window: table.window });
    }
    Ok(())
}

/// Integrated density of states of J: the k-averaged eigenvalue count in J
/// divided by the volume of a cell of Λ. For the free 2D Dirac operator on
/// ℤ² this gives N⁺(λ) ≈ λ²/(4π).
pub fn ids(table: &BandTable, j: &Interval) -> Result<f64, SpectraError> {
    if j.is_empty() {
        return Ok(0.0);
    }
    check_trusted(table, j.lo, j.hi)?;
    let total: usize = table.eigenvalues.iter().map(|ev| j.count(ev)).sum();
    Ok(total as f64 / table.eigenvalues.len() as f64 / table.cell_volume)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Overlap {
    /// max_j min(λ − inf ι_j, sup ι_j − λ), capped by the distance to the window edge.
    pub zeta: f64,
    /// The same quantity from the counting-function characterisation.
    pub zeta_counting: f64,
    pub cap: f64,
}

/// ζ(λ) in band form and in counting form, both capped at W − |λ|.
pub fn overlap_zeta(table: &BandTable, lambda: f64) -> Result<Overlap, SpectraError> {
    check_trusted(table, lambda, lambda)?;
    let cap = table.window - lambda.abs();
    let mut zeta: f64 = 0.0;
    for (lo, hi) in table.bands() {
        if lo <= lambda && lambda <= hi {
            zeta = zeta.max((lambda - lo).min(hi - lambda));
        }
    }
    let zeta = zeta.min(cap);
    Ok(Overlap { zeta, zeta_counting: counting_zeta(table, lambda, cap), cap })
}

/// sup{t ≤ cap : min_k #(−∞,λ+t] < max_k #(−∞,λ−t)} by bisection.
fn counting_zeta(table: &BandTable, lambda: f64, cap: f64) -> f64 {
    let holds = |t: f64| {
        let lower = table
            .eigenvalues
            .iter()
            .map(|ev| ev.partition_point(|&x| x <= lambda + t))
            .min()
            .unwrap_or(0);
        let upper = table
            .eigenvalues
            .iter()
            .map(|ev| ev.partition_point(|&x| x < lambda - t))
            .max()
            .unwrap_or(0);
        lower < upper
    };
    if !holds(0.0) {
        return 0.0;
    }
    if holds(cap) {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Clone, Debug, Serialize)]
pub struct BsScan {
    pub lambdas: Vec<f64>,
    pub zetas: Vec<f64>,
    /// Maximal runs of grid points with ζ = 0.
    pub gaps: Vec<(f64, f64)>,
    /// Minimum of ζ over the grid (0 when a gap is present).
    pub min_zeta: f64,
}

pub fn bs_scan(table: &BandTable, lo: f64, hi: f64, n: usize) -> Result<BsScan, SpectraError> {
    check_trusted(table, lo, hi)?;
    let n = n.max(2);
    let lambdas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let zetas = lambdas
        .iter()
        .map(|&l| overlap_zeta(table, l).map(|o| o.zeta))
        .collect::<Result<Vec<_>, _>>()?;
    let mut gaps = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for (&l, &z) in lambdas.iter().zip(&zetas) {
        if z <= 0.0 {
            run = Some(run.map_or((l, l), |(a, _)| (a, l)));
        } else if let Some(g) = run.take() {
            gaps.push(g);
        }
    }
    gaps.extend(run);
    let min_zeta = zetas.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(BsScan { lambdas, zetas, gaps, min_zeta })
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketViolation {
    pub k_index: usize,
    pub interval: Interval,
    pub counts: [usize; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    pub pass: bool,
    pub intervals: Vec<Interval>,
    pub violations: Vec<BracketViolation>,
    pub seed: u64,
}

/// Checks N(J₋ε; A) ≤ N(J; A+B) ≤ N(J_ε; A) at every k for `n` seeded
/// random closed intervals inside the common trusted window.
pub fn bracket_check(a: &BandTable, ab: &BandTable, eps: f64, n: usize, seed: u64) -> Result<BracketReport, SpectraError> {
    if a.ks != ab.ks || a.radius != ab.radius || a.eigenvalues.iter().zip(&ab.eigenvalues).any(|(x, y)| x.len() != y.len()) {
        return Err(SpectraError::GridMismatch("tables differ in k-grid, radius or fiber size".into()));
    }
    let w = a.window.min(ab.window) - eps.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut intervals = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen_range(-w..w);
        let y: f64 = rng.gen_range(-w..w);
        intervals.push(Interval::closed(x.min(y), x.max(y)));
    }
    let mut violations = Vec::new();
    for j in &intervals {
        let inner = j.inflate(-eps);
        let outer = j.inflate(eps);
        for (ki, (ea, eab)) in a.eigenvalues.iter().zip(&ab.eigenvalues).enumerate() {
            let counts = [inner.count(ea), j.count(eab), outer.count(ea)];
            if counts[0] > counts[1] || counts[1] > counts[2] {
                violations.push(BracketViolation { k_index: ki, interval: *j, counts });
            }
        }
    }
    Ok(BracketReport { pass: violations.is_empty(), intervals, violations, seed })
}
