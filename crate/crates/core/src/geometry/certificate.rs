//! Good-point search and the per-instance counting certificate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{n_count, Region, ResonanceGeometryConfig};
use super::montecarlo::ShellSampler;
use super::GeometryError;
use crate::spectra::{assemble_fiber, PeriodicModel};

/// Exponent s with δ = o(ρ^s) in the non-emptiness statement for 𝒦.
pub fn overlap_exponent(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    let a = (alpha * d - d * d - 3.0 * d - alpha - 2.0) / (2.0 * (d + 2.0));
    let b = alpha - d + (alpha - d - 2.0) / (2.0 * (d + 2.0));
    a.min(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodPoint {
    pub xi: Vec<f64>,
    pub iterations: usize,
    pub n_good: usize,
    pub n_resonant_enlarged: usize,
    /// θ with ξ + θ ∈ 𝒢′.
    pub witnesses: Vec<Vec<f64>>,
    pub samples_in_g: usize,
    pub failed_count: usize,
    pub failed_angle: usize,
    /// Rejections where n(ξ;𝒵′) < n(ξ;𝒢) ≤ m·n(ξ;𝒵′), i.e. only the factor m failed.
    pub factor_binds: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    c.clamp(-1.0, 1.0).acos()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Rejection-samples 𝒢 until a point passes the counting test
/// n(ξ;𝒢) > m·n(ξ;𝒵′) and all translates in 𝒢′ lie pairwise within π/4.
pub fn find_good_point(cfg: &ResonanceGeometryConfig, seed: u64, max_iters: usize) -> Result<GoodPoint, GeometryError> {
    let mut warnings = cfg.validate();
    let s = overlap_exponent(cfg.d, cfg.alpha);
    if cfg.delta > cfg.rho.powf(s) {
        warnings.push(format!("delta = {} exceeds rho^s = {} (s = {s})", cfg.delta, cfg.rho.powf(s)));
    }
    let none = GeometryError::NotFound { iters: 0, in_g: 0, failed_count: 0, failed_angle: 0 };
    if cfg.delta >= cfg.energy() {
        return Err(none);
    }
    let js: Vec<usize> = (0..cfg.m()).collect();
    let sampler = ShellSampler::new(cfg, &js)?;
    if sampler.is_empty() {
        return Err(none);
    }
    let g = Region::G { j: None, enlarged: false };
    let g_prime = Region::G { j: None, enlarged: true };
    let z_prime = Region::Z { j: None, enlarged: true };
    let m = cfg.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut in_g, mut failed_count, mut failed_angle, mut binds) = (0, 0, 0, 0);
    for it in 1..=max_iters {
        let xi = sampler.sample(&mut rng);
        if !cfg.contains(&g, &xi) {
            continue;
        }
        in_g += 1;
        let n_good = n_count(cfg, &xi, &g, f64::INFINITY);
        let n_z = n_count(cfg, &xi, &z_prime, f64::INFINITY);
        if n_good <= m * n_z {
            failed_count += 1;
            if n_good > n_z {
                binds += 1;
            }
            continue;
        }
        let witnesses: Vec<Vec<f64>> = cfg
            .frequencies()
            .iter()
            .filter(|t| cfg.contains(&g_prime, &add(&xi, t)))
            .cloned()
            .collect();
        let pts: Vec<Vec<f64>> = witnesses.iter().map(|t| add(&xi, t)).collect();
        let spread = pts
            .iter()
            .enumerate()
            .any(|(a, p)| pts[a + 1..].iter().any(|q| angle(p, q) > std::f64::consts::FRAC_PI_4));
        if spread {
            failed_angle += 1;
            continue;
        }
        return Ok(GoodPoint {
            xi,
            iterations: it,
            n_good,
            n_resonant_enlarged: n_z,
            witnesses,
            samples_in_g: in_g,
            failed_count,
            failed_angle,
            factor_binds: binds,
            seed,
            warnings,
        });
    }
    Err(GeometryError::NotFound { iters: max_iters, in_g, failed_count, failed_angle })
}

#[derive(Clone, Debug, Serialize)]
pub struct CountingCertificate {
    pub xi0: Vec<f64>,
    /// Radial half-length: 𝒥 = [(1−t)ξ₀, (1+t)ξ₀].
    pub t: f64,
    pub rho_pow_minus_nu: f64,
    pub mu: usize,
    pub nu: usize,
    pub tau: usize,
    pub mu_increasing: bool,
    /// Smallest finite-difference slope of a μ branch along 𝒥, divided by ρ^α.
    pub min_mu_slope_ratio: f64,
    pub tau_outside: bool,
    pub count_low: usize,
    pub count_high: usize,
    /// N(ρ^α − δ; A(k₁)) − N(ρ^α + δ; A(k₂)) on the truncated fibers.
    pub count_difference: i64,
    pub holds: bool,
    /// Branches that defied their class.
    pub mismatches: Vec<String>,
}

fn reduce(model: &PeriodicModel, k: &[f64]) -> Vec<f64> {
    let c = model.lattice.dual_coords(k);
    let n: Vec<i64> = c.iter().map(|x| x.round() as i64).collect();
    let shift = model.lattice.dual_point(&n);
    k.iter().zip(&shift).map(|(a, b)| a - b).collect()
}

/// Classifies branches (j, θ) at ξ₀ and checks the counting inequality on
/// the model's truncated fibers at the two ends of 𝒥.
pub fn counting_certificate(
    cfg: &ResonanceGeometryConfig,
    xi0: &[f64],
    model: &PeriodicModel,
    radius: f64,
) -> Result<CountingCertificate, GeometryError> {
    let e = cfg.energy();
    let delta = cfg.delta;
    let zd = cfg.enlarge * delta;
    let mut mu = Vec::new();
    let mut tau = Vec::new();
    let mut nu = 0;
    for j in 0..cfg.m() {
        for th in cfg.frequencies() {
            let y = add(xi0, th);
            let g = cfg.g(j, &y);
            if cfg.contains(&Region::G { j: Some(j), enlarged: false }, &y) {
                mu.push((j, th.clone()));
            } else if (g - e).abs() >= zd / 2.0 {
                tau.push((j, th.clone()));
            } else {
                nu += 1;
            }
        }
    }
    let branch = |j: usize, th: &[f64], s: f64| -> f64 {
        let p: Vec<f64> = xi0.iter().zip(th).map(|(x, t)| (1.0 + s) * x + t).collect();
        cfg.g(j, &p)
    };
    let crosses = |t: f64| mu.iter().all(|(j, th)| branch(*j, th, -t) < e - delta && branch(*j, th, t) > e + delta);
    let mut mismatches = Vec::new();
    let t_max = 0.5;
    let t = if crosses(t_max) {
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if crosses(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    } else {
        mismatches.push(format!("some mu branch does not cross the window within t = {t_max}"));
        t_max
    };
    let grid: Vec<f64> = (0..=10).map(|i| -t + 2.0 * t * i as f64 / 10.0).collect();
    let mut mu_increasing = true;
    let mut min_slope = f64::INFINITY;
    for (j, th) in &mu {
        let vals: Vec<f64> = grid.iter().map(|s| branch(*j, th, *s)).collect();
        for w in vals.windows(2) {
            min_slope = min_slope.min((w[1] - w[0]) / (grid[1] - grid[0]));
            if w[1] <= w[0] {
                mu_increasing = false;
                mismatches.push(format!("mu branch j={j}, theta={th:?} not increasing"));
                break;
            }
        }
    }
    let mut tau_outside = true;
    for (j, th) in &tau {
        if grid.iter().any(|s| (branch(*j, th, *s) - e).abs() <= delta) {
            tau_outside = false;
            mismatches.push(format!("tau branch j={j}, theta={th:?} enters the window"));
        }
    }
    let k1: Vec<f64> = xi0.iter().map(|x| (1.0 - t) * x).collect();
    let k2: Vec<f64> = xi0.iter().map(|x| (1.0 + t) * x).collect();
    let ev1 = assemble_fiber(model, &reduce(model, &k1), radius)?.eigenvalues();
    let ev2 = assemble_fiber(model, &reduce(model, &k2), radius)?.eigenvalues();
    let count_low = ev1.partition_point(|&x| x < e - delta);
    let count_high = ev2.partition_point(|&x| x <= e + delta);
    let diff = count_low as i64 - count_high as i64;
    Ok(CountingCertificate {
        xi0: xi0.to_vec(),
        t,
        rho_pow_minus_nu: cfg.rho.powf(-cfg.nu),
        mu: mu.len(),
        nu,
        tau: tau.len(),
        mu_increasing,
        min_mu_slope_ratio: if mu.is_empty() { 0.0 } else { min_slope / e },
        tau_outside,
        count_low,
        count_high,
        count_difference: diff,
        holds: diff >= 1,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FrequencySpec;

    #[test]
    fn exponent_formula() {
        assert!((overlap_exponent(2, 2.0) + 1.25).abs() < 1e-12);
    }

    #[test]
    fn trivial_frequency_set() {
        let c = ResonanceGeometryConfig::new(2, vec![1.0], 2.0, 20.0, 0.01, 0.2, 0.9, FrequencySpec::Points(vec![vec![0.0, 0.0]])).unwrap();
        let g = find_good_point(&c, 3, 100).unwrap();
        assert_eq!(g.n_good, 1);
        assert_eq!(g.n_resonant_enlarged, 0);
        let big = c.with_delta(500.0);
        assert!(matches!(find_good_point(&big, 3, 100), Err(GeometryError::NotFound { iters: 0, .. })));
    }
}
