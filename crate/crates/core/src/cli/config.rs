//! Experiment configuration documents.

use serde::{Deserialize, Serialize};

use super::dsl::{parse_coeff_expr, print_coeff_expr, DslContext, EntryDoc};
use super::CliError;
use crate::clifford::{build_generators, free_dirac_symbol};
use crate::geometry::ResonanceGeometryConfig;
use crate::spectra::{KGrid, Lattice, PeriodicModel};
use crate::symbols::{Frequency, MatrixSymbol};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSpec {
    /// Basis vectors of the period lattice.
    Basis(Vec<Vec<f64>>),
    /// Only "aperiodic" is accepted.
    Named(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BaseSymbol {
    /// Only the listed entries.
    #[default]
    None,
    /// Σ ξ_j h_j + M·Γ plus the listed entries.
    Dirac,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Principal {
    pub exponents: Vec<f64>,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModelConfig {
    pub d: usize,
    pub m: usize,
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub base: BaseSymbol,
    #[serde(default)]
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal: Option<Principal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    #[serde(default)]
    pub entries: Vec<EntryDoc>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GaugeVariant {
    #[default]
    Weak,
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UncoupleModeSpec {
    #[default]
    Onestep,
    Full,
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GaugeConfig {
    pub delta: f64,
    pub s: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub variant: GaugeVariant,
    #[serde(default = "one_usize")]
    pub k_tilde: usize,
    /// Series truncation K; chosen from the tail bound when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
    #[serde(default)]
    pub eps_trim: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trim_radius: Option<f64>,
    #[serde(default)]
    pub mode: UncoupleModeSpec,
    /// Target order −N for the full uncoupling.
    #[serde(default = "one_usize")]
    pub n: usize,
    #[serde(default)]
    pub l: f64,
    #[serde(default = "yes")]
    pub ledger: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.n <= 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

fn default_offset() -> f64 {
    0.5
}

fn default_intervals() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpectraConfig {
    pub radius: f64,
    pub k_grid: Vec<usize>,
    #[serde(default = "default_offset")]
    pub k_offset: f64,
    /// Explicit quasimomenta for `bands`; replaces the grid when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_points: Option<Vec<Vec<f64>>>,
    pub lambda: LambdaGrid,
    /// ε with ‖B‖ ≤ ε for the bracket check in `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation_bound: Option<f64>,
    #[serde(default = "default_intervals")]
    pub intervals: usize,
}

impl SpectraConfig {
    pub fn grid(&self) -> KGrid {
        KGrid { n: self.k_grid.clone(), offset: self.k_offset }
    }
}

fn default_samples() -> usize {
    100_000
}

fn default_iters() -> usize {
    2000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeometryBlock {
    #[serde(flatten)]
    pub base: ResonanceGeometryConfig,
    /// ρ values for the scaling sweep; `base.rho` alone when empty.
    #[serde(default)]
    pub rhos: Vec<f64>,
    /// When set, δ = factor·ρ^s at each ρ with s the overlap exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_factor: Option<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    /// Run the good-point search and counting certificate at `base.rho`.
    #[serde(default)]
    pub certificate: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<SpectraConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that do not need the model built.
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        if m.d == 0 || m.m == 0 {
            return Err(bad("model.d and model.m must be positive"));
        }
        finite("model.mass", m.mass)?;
        match &m.lattice {
            LatticeSpec::Named(s) if s != "aperiodic" => {
                return Err(bad(format!("model.lattice must be a basis or \"aperiodic\", got \"{s}\"")))
            }
            LatticeSpec::Basis(b) if b.len() != m.d || b.iter().any(|v| v.len() != m.d) => {
                return Err(bad(format!("model.lattice needs {} vectors of length {}", m.d, m.d)))
            }
            _ => {}
        }
        if m.base == BaseSymbol::Dirac {
            let rep = build_generators(m.d).map_err(|e| bad(e.to_string()))?;
            if rep.m != m.m {
                return Err(bad(format!("Dirac base in d={} needs m={}, got {}", m.d, rep.m, m.m)));
            }
        }
        if let Some(p) = &m.principal {
            if p.exponents.len() != m.m {
                return Err(bad(format!("model.principal.exponents needs {} values", m.m)));
            }
            if !(p.alpha > 0.0) {
                return Err(bad("model.principal.alpha must be positive"));
            }
        }
        for e in &m.entries {
            if e.theta.len() != m.d {
                return Err(bad(format!("entry theta {:?} has wrong length", e.theta)));
            }
        }
        if let Some(g) = &self.gauge {
            finite("gauge.delta", g.delta)?;
            finite("gauge.beta", g.beta)?;
            if !(g.s > 0.0) {
                return Err(bad("gauge.s must be positive"));
            }
            if g.k_tilde == 0 {
                return Err(bad("gauge.kTilde must be at least 1"));
            }
            if g.eps_trim < 0.0 {
                return Err(bad("gauge.epsTrim must be non-negative"));
            }
        }
        if let Some(s) = &self.spectra {
            if !(s.radius > 0.0) {
                return Err(bad("spectra.radius must be positive"));
            }
            if s.k_grid.len() != m.d || s.k_grid.contains(&0) {
                return Err(bad(format!("spectra.kGrid needs {} positive sizes", m.d)));
            }
            if !(0.0..=1.0).contains(&s.k_offset) {
                return Err(bad("spectra.kOffset must lie in [0, 1]"));
            }
            if s.lambda.n == 0 || !(s.lambda.lo <= s.lambda.hi) {
                return Err(bad("spectra.lambda needs lo <= hi and n >= 1"));
            }
            if let Some(ks) = &s.k_points {
                if ks.iter().any(|k| k.len() != m.d) {
                    return Err(bad("spectra.kPoints entries need length d"));
                }
            }
        }
        if let Some(g) = &self.geometry {
            if g.base.d != m.d {
                return Err(bad("geometry.d differs from model.d"));
            }
            if g.rhos.iter().any(|r| !(*r > 0.0)) || !(g.base.rho > 0.0) {
                return Err(bad("geometry rho values must be positive"));
            }
            if g.n_samples < 1000 {
                return Err(bad("geometry.nSamples must be at least 1000"));
            }
        }
        Ok(())
    }

    pub fn dsl_context(&self) -> DslContext {
        DslContext::new(self.model.d, self.model.m)
    }

    pub fn symbol(&self) -> Result<MatrixSymbol, CliError> {
        let m = &self.model;
        let ctx = self.dsl_context();
        let mut s = match m.base {
            BaseSymbol::None => MatrixSymbol::zero(m.d, m.m),
            BaseSymbol::Dirac => {
                let rep = ctx.rep.as_ref().ok_or_else(|| bad("no Clifford representation for the Dirac base"))?;
                free_dirac_symbol(rep, m.mass)
            }
        };
        for e in &m.entries {
            let theta = Frequency::new(&e.theta).map_err(|err| bad(err.to_string()))?;
            let c = parse_coeff_expr(&e.expr, &ctx).map_err(CliError::Dsl)?;
            s.add_entry(theta, c);
        }
        if let Some(order) = m.order {
            s.order = order;
        } else if let Some(p) = &m.principal {
            s.order = p.alpha;
        }
        Ok(s)
    }

    pub fn periodic_model(&self) -> Result<PeriodicModel, CliError> {
        let LatticeSpec::Basis(basis) = &self.model.lattice else {
            return Err(bad("this command needs a periodic model.lattice"));
        };
        let lattice = Lattice::new(basis).map_err(|e| bad(e.to_string()))?;
        let mut model = PeriodicModel::new(lattice, self.symbol()?).map_err(|e| bad(e.to_string()))?;
        if let Some(p) = &self.model.principal {
            model = model.with_principal(p.exponents.clone(), p.alpha);
        }
        Ok(model)
    }

    pub fn require_gauge(&self) -> Result<&GaugeConfig, CliError> {
        self.gauge.as_ref().ok_or_else(|| bad("missing gauge block"))
    }

    pub fn require_spectra(&self) -> Result<&SpectraConfig, CliError> {
        self.spectra.as_ref().ok_or_else(|| bad("missing spectra block"))
    }

    pub fn require_geometry(&self) -> Result<&GeometryBlock, CliError> {
        self.geometry.as_ref().ok_or_else(|| bad("missing geometry block"))
    }

    /// The same document with every entry expression replaced by its
    /// printed canonical form.
    pub fn canonical(&self) -> Result<ExperimentConfig, CliError> {
        let ctx = self.dsl_context();
        let mut out = self.clone();
        for e in &mut out.model.entries {
            let c = parse_coeff_expr(&e.expr, &ctx).map_err(CliError::Dsl)?;
            e.expr = print_coeff_expr(&c, &ctx).map_err(CliError::Dsl)?;
        }
        Ok(out)
    }
}
