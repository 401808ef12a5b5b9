//! Importance-sampled volumes over the enlarged spectral shell.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Region, ResonanceGeometryConfig};
use super::GeometryError;

const BATCH: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: usize,
    pub samples: usize,
    pub proposal_volume: f64,
    pub seed: u64,
}

/// Uniform sampler on ∪_j {|g_j − ρ^α| ≤ Zδ} in polar form.
pub(crate) struct ShellSampler {
    d: usize,
    /// (r_lo^d, r_hi^d) per radial interval, with cumulative weights.
    pieces: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    pub volume: f64,
}

fn sphere_area(d: usize) -> f64 {
    // |S^{d−1}| = 2π^{d/2}/Γ(d/2), via the recursion |S^{d+1}| = 2π|S^{d−1}|/d.
    let mut a = if d % 2 == 0 { 2.0 * std::f64::consts::PI } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 1 };
    while k < d {
        a *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    a
}

fn merge(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

impl ShellSampler {
    pub fn new(cfg: &ResonanceGeometryConfig, js: &[usize]) -> Result<Self, GeometryError> {
        let half = cfg.half_width(true);
        let mut iv = Vec::new();
        for &j in js {
            if let Some(x) = cfg.radial_interval(j, half)? {
                iv.push(x);
            }
        }
        let d = cfg.d;
        let pieces: Vec<(f64, f64)> = merge(iv)
            .into_iter()
            .map(|(a, b)| (a.powi(d as i32), b.powi(d as i32)))
            .collect();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (a, b) in &pieces {
            acc += b - a;
            cumulative.push(acc);
        }
        Ok(ShellSampler {
            d,
            pieces,
            cumulative,
            volume: sphere_area(d) / d as f64 * acc,
        })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let total = *self.cumulative.last().unwrap();
        let x: f64 = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|c| *c < x).min(self.pieces.len() - 1);
        let (a, b) = self.pieces[i];
        let r = (a + rng.gen::<f64>() * (b - a)).powf(1.0 / self.d as f64);
        loop {
            let u: Vec<f64> = (0..self.d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-12 {
                return u.into_iter().map(|v| v * r / n).collect();
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

/// Counts hits of `accept` over `n` proposal samples, batched with one
/// ChaCha stream per batch and merged in batch order.
pub(crate) fn sample_hits(
    sampler: &ShellSampler,
    n: usize,
    seed: u64,
    accept: impl Fn(&[f64]) -> bool + Sync,
) -> usize {
    let batches = n.div_ceil(BATCH);
    let counts: Vec<usize> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BATCH.min(n - b * BATCH);
            (0..len).filter(|_| accept(&sampler.sample(&mut rng))).count()
        })
        .collect();
    counts.into_iter().sum()
}

fn finish(sampler: &ShellSampler, hits: usize, n: usize, seed: u64) -> VolumeEstimate {
    let p = hits as f64 / n as f64;
    VolumeEstimate {
        estimate: sampler.volume * p,
        stderr: sampler.volume * (p * (1.0 - p) / n as f64).sqrt(),
        hits,
        samples: n,
        proposal_volume: sampler.volume,
        seed,
    }
}

fn region_js(cfg: &ResonanceGeometryConfig, region: &Region) -> Vec<usize> {
    match region {
        Region::A { j: Some(j), .. } | Region::Z { j: Some(j), .. } | Region::G { j: Some(j), .. } => vec![*j],
        _ => (0..cfg.m()).collect(),
    }
}

/// Volume of a region contained in the enlarged shell; Ball regions are
/// intersected with it.
pub fn mc_volume(cfg: &ResonanceGeometryConfig, region: &Region, n: usize, seed: u64) -> Result<VolumeEstimate, GeometryError> {
    if n < 1000 {
        return Err(GeometryError::InvalidConfig(format!("need at least 1000 samples, got {n}")));
    }
    let sampler = ShellSampler::new(cfg, &region_js(cfg, region))?;
    if sampler.is_empty() || *region == Region::Empty {
        return Ok(finish(&sampler, 0, n, seed));
    }
    let hits = sample_hits(&sampler, n, seed, |x| cfg.contains(region, x));
    Ok(finish(&sampler, hits, n, seed))
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let c = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    c.clamp(-1.0, 1.0).acos()
}

/// Volume of {ξ ∈ 𝒜_i ∩ (𝒜_j + b) : φ(ξ, ξ − b) ≥ ω}.
pub fn crossing_volume(
    cfg: &ResonanceGeometryConfig,
    i: usize,
    j: usize,
    omega: f64,
    b: &[f64],
    n: usize,
    seed: u64,
) -> Result<VolumeEstimate, GeometryError> {
    let sampler = ShellSampler::new(cfg, &[i])?;
    if sampler.is_empty() {
        return Ok(finish(&sampler, 0, n.max(1), seed));
    }
    let hits = sample_hits(&sampler, n, seed, |x| {
        if !cfg.in_annulus(i, x, false) {
            return false;
        }
        let y: Vec<f64> = x.iter().zip(b).map(|(a, c)| a - c).collect();
        cfg.in_annulus(j, &y, false) && angle(x, &y) >= omega
    });
    Ok(finish(&sampler, hits, n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::config::FrequencySpec;
    use std::f64::consts::PI;

    #[test]
    fn annulus_volume() {
        let c = ResonanceGeometryConfig::new(2, vec![1.0], 2.0, 30.0, 1.0, 0.2, 0.9, FrequencySpec::Points(vec![])).unwrap();
        let v = mc_volume(&c, &Region::A { j: None, enlarged: false }, 20_000, 5).unwrap();
        assert!((v.estimate - 2.0 * PI).abs() < 4.0 * v.stderr, "{v:?}");
        let again = mc_volume(&c, &Region::A { j: None, enlarged: false }, 20_000, 5).unwrap();
        assert_eq!(v.hits, again.hits);
        assert!((v.proposal_volume - 16.0 * PI).abs() < 1e-9);
        let e = mc_volume(&c, &Region::Empty, 2000, 5).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn shell_volume_3d() {
        let c = ResonanceGeometryConfig::new(3, vec![1.0], 1.0, 20.0, 0.5, 0.1, 0.5, FrequencySpec::Points(vec![])).unwrap();
        let v = mc_volume(&c, &Region::A { j: None, enlarged: false }, 40_000, 9).unwrap();
        let exact = 4.0 * PI / 3.0 * (20.5f64.powi(3) - 19.5f64.powi(3));
        assert!((v.estimate - exact).abs() < 4.0 * v.stderr, "{} vs {exact}", v.estimate);
    }

    #[test]
    fn crossing_limits() {
        let c = ResonanceGeometryConfig::new(2, vec![1.0], 2.0, 30.0, 1.0, 0.2, 0.9, FrequencySpec::Points(vec![])).unwrap();
        let small = crossing_volume(&c, 0, 0, PI / 8.0, &[0.3, 0.0], 5000, 1).unwrap();
        assert_eq!(small.estimate, 0.0);
        let far = crossing_volume(&c, 0, 0, PI / 8.0, &[300.0, 0.0], 5000, 1).unwrap();
        assert_eq!(far.estimate, 0.0);
        let full = crossing_volume(&c, 0, 0, 0.0, &[0.0, 0.0], 20_000, 1).unwrap();
        assert!((full.estimate - 2.0 * PI).abs() < 4.0 * full.stderr);
    }
}
