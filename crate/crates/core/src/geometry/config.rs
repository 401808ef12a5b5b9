//! Configuration, radial functions g_j and region predicates.

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// One term c·r^p of a radial perturbation G_j(r).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialTerm {
    pub coeff: f64,
    pub power: f64,
}

/// A finite frequency set: explicit points, or lattice points
/// Σ n_i·b_i inside a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencySpec {
    Points(Vec<Vec<f64>>),
    Lattice { basis: Vec<Vec<f64>>, radius: f64 },
}

impl FrequencySpec {
    pub fn resolve(&self) -> Result<Vec<Vec<f64>>, GeometryError> {
        match self {
            FrequencySpec::Points(p) => Ok(p.clone()),
            FrequencySpec::Lattice { basis, radius } => {
                // Columns of the dual matrix are the generators; invert the
                // relation b = 2π·A^{-T} to reuse the lattice enumerator.
                let d = basis.len();
                let b = nalgebra::DMatrix::from_fn(d, d, |r, c| basis[c][r]);
                let a = b
                    .try_inverse()
                    .ok_or(GeometryError::Spectra(crate::spectra::SpectraError::SingularLattice))?
                    .transpose()
                    * (2.0 * std::f64::consts::PI);
                let direct: Vec<Vec<f64>> = (0..d).map(|c| (0..d).map(|r| a[(r, c)]).collect()).collect();
                let lat = crate::spectra::Lattice::new(&direct)?;
                Ok(lat.enumerate_dual(*radius).into_iter().map(|p| p.theta).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResonanceGeometryConfig {
    pub d: usize,
    /// Constants a_j > 0 of g_j = a_j|ξ|^α + G_j.
    pub exponents: Vec<f64>,
    pub alpha: f64,
    pub rho: f64,
    pub delta: f64,
    pub kappa: f64,
    pub nu: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    pub theta: FrequencySpec,
    #[serde(default = "default_z")]
    pub enlarge: f64,
    #[serde(default)]
    pub g_perturbation: Vec<Vec<RadialTerm>>,
    #[serde(skip)]
    points: Vec<Vec<f64>>,
    #[serde(skip)]
    resonant_dirs: Vec<Vec<f64>>,
}

fn default_omega() -> f64 {
    std::f64::consts::FRAC_PI_8
}

fn default_z() -> f64 {
    8.0
}

/// Which set a predicate or count refers to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// 𝒜_j (or the union over j when `j` is None); `enlarged` uses Zδ.
    A { j: Option<usize>, enlarged: bool },
    Z { j: Option<usize>, enlarged: bool },
    G { j: Option<usize>, enlarged: bool },
    Ball(f64),
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub in_a: bool,
    pub in_z: bool,
    pub in_g: bool,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl ResonanceGeometryConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        exponents: Vec<f64>,
        alpha: f64,
        rho: f64,
        delta: f64,
        kappa: f64,
        nu: f64,
        theta: FrequencySpec,
    ) -> Result<Self, GeometryError> {
        let mut cfg = ResonanceGeometryConfig {
            d,
            exponents,
            alpha,
            rho,
            delta,
            kappa,
            nu,
            omega: default_omega(),
            theta,
            enlarge: default_z(),
            g_perturbation: Vec::new(),
            points: Vec::new(),
            resonant_dirs: Vec::new(),
        };
        cfg.prepare()?;
        Ok(cfg)
    }

    /// Resolves Θ and caches the directions of Θ_κ; call after editing fields.
    pub fn prepare(&mut self) -> Result<(), GeometryError> {
        if self.d == 0 || self.exponents.is_empty() {
            return Err(GeometryError::InvalidConfig("d and exponents must be non-empty".into()));
        }
        if !self.g_perturbation.is_empty() && self.g_perturbation.len() != self.exponents.len() {
            return Err(GeometryError::InvalidConfig("one perturbation list per exponent".into()));
        }
        self.points = self.theta.resolve()?;
        if self.points.iter().any(|p| p.len() != self.d) {
            return Err(GeometryError::InvalidConfig("frequency dimension differs from d".into()));
        }
        let cut = self.rho.powf(self.kappa);
        self.resonant_dirs = self
            .points
            .iter()
            .filter(|p| {
                let n = norm(p);
                n > 0.0 && n <= cut
            })
            .map(|p| {
                let n = norm(p);
                p.iter().map(|x| x / n).collect()
            })
            .collect();
        Ok(())
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        ResonanceGeometryConfig { delta, ..self.clone() }
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self, GeometryError> {
        let mut c = ResonanceGeometryConfig { rho, ..self.clone() };
        c.prepare()?;
        Ok(c)
    }

    pub fn m(&self) -> usize {
        self.exponents.len()
    }

    pub fn frequencies(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Unit vectors of Θ_κ = (Θ∖0) ∩ B(ρ^κ).
    pub fn resonant_directions(&self) -> &[Vec<f64>] {
        &self.resonant_dirs
    }

    pub fn energy(&self) -> f64 {
        self.rho.powf(self.alpha)
    }

    pub fn g_radial(&self, j: usize, r: f64) -> f64 {
        let mut v = self.exponents[j] * r.powf(self.alpha);
        if let Some(terms) = self.g_perturbation.get(j) {
            v += terms.iter().map(|t| t.coeff * r.powf(t.power)).sum::<f64>();
        }
        v
    }

    pub fn g(&self, j: usize, xi: &[f64]) -> f64 {
        self.g_radial(j, norm(xi))
    }

    pub fn half_width(&self, enlarged: bool) -> f64 {
        if enlarged {
            self.delta * self.enlarge
        } else {
            self.delta
        }
    }

    /// Parameter-window warnings; never fatal.
    pub fn validate(&self) -> Vec<String> {
        let mut w = Vec::new();
        let d = self.d as f64;
        if !(self.kappa > 0.0 && self.kappa < 1.0 / (d * d)) {
            w.push(format!("kappa = {} outside (0, 1/d^2)", self.kappa));
        }
        if !(self.kappa * d < self.nu && self.nu < 1.0) {
            w.push(format!("nu = {} outside (kappa*d, 1)", self.nu));
        }
        if self.delta >= self.energy() / 4.0 {
            w.push(format!("delta = {} is not below rho^alpha/4", self.delta));
        }
        if self.exponents.iter().any(|a| *a <= 0.0) {
            w.push("exponents a_j must be positive".into());
        }
        w
    }

    /// True when u is within 2ρ^{−ν} of the hyperplane ⊥ some θ ∈ Θ_κ.
    pub fn in_resonant_cone(&self, xi: &[f64]) -> bool {
        let n = norm(xi);
        let tol = 2.0 * self.rho.powf(-self.nu);
        self.resonant_dirs
            .iter()
            .any(|u| (u.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() / n).abs() < tol)
    }

    pub fn in_annulus(&self, j: usize, xi: &[f64], enlarged: bool) -> bool {
        let e = self.energy();
        let h = self.half_width(enlarged);
        let g = self.g(j, xi);
        g >= e - h && g <= e + h
    }

    pub fn contains(&self, region: &Region, xi: &[f64]) -> bool {
        let js = |j: &Option<usize>| -> Vec<usize> {
            match j {
                Some(j) => vec![*j],
                None => (0..self.m()).collect(),
            }
        };
        match region {
            Region::Empty => false,
            Region::Ball(r) => norm(xi) < *r,
            Region::A { j, enlarged } => js(j).into_iter().any(|j| self.in_annulus(j, xi, *enlarged)),
            Region::Z { j, enlarged } => {
                norm(xi) > 0.0
                    && js(j).into_iter().any(|j| self.in_annulus(j, xi, *enlarged))
                    && self.in_resonant_cone(xi)
            }
            Region::G { j, enlarged } => {
                norm(xi) > 0.0
                    && js(j).into_iter().any(|j| self.in_annulus(j, xi, *enlarged))
                    && !self.in_resonant_cone(xi)
            }
        }
    }

    /// Radial intervals [r_lo, r_hi] with |g_j(r) − ρ^α| ≤ half-width.
    pub fn radial_interval(&self, j: usize, half: f64) -> Result<Option<(f64, f64)>, GeometryError> {
        let e = self.energy();
        let g = |r: f64| self.g_radial(j, r);
        let (lo_t, hi_t) = (e - half, e + half);
        let mut top = self.rho.max(1.0);
        while g(top) < hi_t {
            top *= 2.0;
            if top > 1e300 {
                return Err(GeometryError::RadialBracketFailure(j));
            }
        }
        let n = 64;
        let mut prev = g(0.0);
        for i in 1..=n {
            let v = g(top * i as f64 / n as f64);
            if v < prev {
                return Err(GeometryError::RadialBracketFailure(j));
            }
            prev = v;
        }
        if g(0.0) > hi_t {
            return Ok(None);
        }
        let solve = |target: f64| {
            if g(0.0) >= target {
                return 0.0;
            }
            let (mut a, mut b) = (0.0, top);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if g(mid) < target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        };
        Ok(Some((solve(lo_t), solve(hi_t))))
    }
}

pub fn region_membership(
    cfg: &ResonanceGeometryConfig,
    xi: &[f64],
    j: usize,
    enlarged: bool,
) -> Result<Membership, GeometryError> {
    if norm(xi) == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let in_a = cfg.in_annulus(j, xi, enlarged);
    let in_z = in_a && cfg.in_resonant_cone(xi);
    Ok(Membership {
        in_a,
        in_z,
        in_g: in_a && !in_z,
    })
}

/// n(ξ; E) = #{θ ∈ Θ ∩ B(search) : ξ + θ ∈ E}.
pub fn n_count(cfg: &ResonanceGeometryConfig, xi: &[f64], region: &Region, search_radius: f64) -> usize {
    let mut y = vec![0.0; xi.len()];
    cfg.frequencies()
        .iter()
        .filter(|t| norm(t) <= search_radius)
        .filter(|t| {
            for (o, (a, b)) in y.iter_mut().zip(xi.iter().zip(t.iter())) {
                *o = a + b;
            }
            cfg.contains(region, &y)
        })
        .count()
}
