//! Diagnostics of a finite frequency set and its k-fold sumset: extent,
//! smallest nonzero length, separation, and the angular constant s.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::GeometryError;

const BUDGET: usize = 100_000;

#[derive(Clone, Debug, Serialize)]
pub struct FreqDiagnostics {
    /// max |θ| over the sumset.
    pub big_r: f64,
    /// min nonzero |θ|.
    pub small_r: f64,
    /// Minimal sine of the angle between strongly distinct spanned subspaces
    /// with their intersection removed.
    pub s: f64,
    /// Set when no strongly distinct pair exists and s is reported as 1.
    pub s_by_convention: bool,
    pub min_pairwise_distance: f64,
    pub sumset_size: usize,
    pub subspaces: usize,
}

fn key(v: &[f64], scale: f64) -> Vec<i64> {
    v.iter().map(|x| (x * scale).round() as i64).collect()
}

fn sumset(theta: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>, GeometryError> {
    let d = theta.first().map_or(0, |t| t.len());
    let mut cur: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    cur.insert(key(&vec![0.0; d], 1e9), vec![0.0; d]);
    for _ in 0..k {
        let mut next = BTreeMap::new();
        for a in cur.values() {
            for b in theta {
                let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                next.entry(key(&s, 1e9)).or_insert(s);
                if next.len() > BUDGET {
                    return Err(GeometryError::CombinatorialBudgetExceeded(BUDGET));
                }
            }
        }
        cur = next;
    }
    Ok(cur.into_values().collect())
}

/// Orthonormal basis of span(vs), or None when the vectors are dependent.
fn orthonormal(vs: &[&Vec<f64>]) -> Option<DMatrix<f64>> {
    let d = vs[0].len();
    let a = DMatrix::from_fn(d, vs.len(), |r, c| vs[c][r]);
    let qr = a.qr();
    let r = qr.r();
    if (0..vs.len()).any(|i| r[(i, i)].abs() < 1e-10) {
        return None;
    }
    Some(qr.q())
}

fn combinations(n: usize, p: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize) -> bool {
    if cur.len() == p {
        out.push(cur.clone());
        return out.len() <= BUDGET;
    }
    for i in start..n {
        cur.push(i);
        let ok = combinations(n, p, out, cur, i + 1);
        cur.pop();
        if !ok {
            return false;
        }
    }
    true
}

pub fn freq_diagnostics(theta: &[Vec<f64>], k: usize) -> Result<FreqDiagnostics, GeometryError> {
    if theta.is_empty() {
        return Err(GeometryError::InvalidConfig("empty frequency set".into()));
    }
    let d = theta[0].len();
    let set = sumset(theta, k.max(1))?;
    let norms: Vec<f64> = set.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let big_r = norms.iter().cloned().fold(0.0, f64::max);
    let small_r = norms.iter().cloned().filter(|n| *n > 1e-12).fold(f64::INFINITY, f64::min);
    let mut min_dist = f64::INFINITY;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            let dd = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            min_dist = min_dist.min(dd);
        }
    }

    // Distinct lines, canonically signed.
    let mut lines: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for (v, n) in set.iter().zip(&norms) {
        if *n <= 1e-12 {
            continue;
        }
        let mut u: Vec<f64> = v.iter().map(|x| x / n).collect();
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
        }
        lines.entry(key(&u, 1e10)).or_insert(u);
    }
    let lines: Vec<Vec<f64>> = lines.into_values().collect();

    // Spanned subspaces of dimension 1..d−1, deduplicated by projector.
    let mut spaces: BTreeMap<Vec<i64>, DMatrix<f64>> = BTreeMap::new();
    for p in 1..d {
        let mut combos = Vec::new();
        if !combinations(lines.len(), p, &mut combos, &mut Vec::new(), 0) {
            return Err(GeometryError::CombinatorialBudgetExceeded(BUDGET));
        }
        for c in combos {
            let vs: Vec<&Vec<f64>> = c.iter().map(|&i| &lines[i]).collect();
            if let Some(q) = orthonormal(&vs) {
                let proj = &q * q.transpose();
                spaces.entry(key(proj.as_slice(), 1e8)).or_insert(q);
                if spaces.len() > BUDGET {
                    return Err(GeometryError::CombinatorialBudgetExceeded(BUDGET));
                }
            }
        }
    }
    let spaces: Vec<DMatrix<f64>> = spaces.into_values().collect();
    let mut s = f64::INFINITY;
    for (i, u) in spaces.iter().enumerate() {
        for v in &spaces[i + 1..] {
            let sv = (u.transpose() * v).singular_values();
            let mut sigma: Vec<f64> = sv.iter().cloned().collect();
            sigma.sort_by(|a, b| b.total_cmp(a));
            let shared = sigma.iter().filter(|x| **x > 1.0 - 1e-10).count();
            if shared == u.ncols().min(v.ncols()) {
                continue;
            }
            let c = sigma[shared];
            s = s.min((1.0 - c * c).max(0.0).sqrt());
        }
    }
    let by_convention = !s.is_finite();
    Ok(FreqDiagnostics {
        big_r,
        small_r,
        s: if by_convention { 1.0 } else { s },
        s_by_convention: by_convention,
        min_pairwise_distance: min_dist,
        sumset_size: set.len(),
        subspaces: spaces.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn axes() {
        let tp = 2.0 * PI;
        let t = vec![vec![0.0, 0.0], vec![tp, 0.0], vec![-tp, 0.0], vec![0.0, tp], vec![0.0, -tp]];
        let r = freq_diagnostics(&t, 1).unwrap();
        assert!((r.big_r - tp).abs() < 1e-12 && (r.small_r - tp).abs() < 1e-12);
        assert!((r.s - 1.0).abs() < 1e-12 && !r.s_by_convention);
    }

    #[test]
    fn single_direction_and_thin_angle() {
        let r = freq_diagnostics(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![-1.0, -2.0]], 2).unwrap();
        assert!(r.s_by_convention && r.s == 1.0);
        let tp = 2.0 * PI;
        let r = freq_diagnostics(&[vec![tp, 0.0], vec![tp, tp * 1e-3]], 1).unwrap();
        assert!((r.s - (1e-3f64).atan().sin()).abs() < 1e-9);
    }

    #[test]
    fn planes_in_3d() {
        let t = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let r = freq_diagnostics(&t, 1).unwrap();
        assert!((r.s - 1.0).abs() < 1e-12);
        assert_eq!(r.subspaces, 6);
    }
}
