use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use super::GaugeError;
use crate::symbols::norm::{norm_auto, NormEstimate};
use crate::symbols::{EvalContext, Frequency, GridSpec, MatrixSymbol};

/// Tuning knobs shared by the transforms.
#[derive(Clone, Debug)]
pub struct GaugeOptions {
    /// Order β of the off-diagonal part.
    pub beta: f64,
    /// Series truncation K; chosen from the tail bound when `None`.
    pub series_order: Option<usize>,
    /// Norm index l for the ledger.
    pub l: f64,
    pub grid: GridSpec,
    /// Whether to fill the norm ledger (sampled norms can be slow).
    pub ledger: bool,
    /// Frequencies beyond this radius may be trimmed by `uncouple_system`.
    pub trim_radius: Option<f64>,
}

impl GaugeOptions {
    pub fn new(d: usize) -> Self {
        GaugeOptions {
            beta: 0.0,
            series_order: None,
            l: 0.0,
            grid: GridSpec::coarse(d),
            ledger: true,
            trim_radius: None,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_series_order(mut self, k: usize) -> Self {
        self.series_order = Some(k);
        self
    }

    pub fn without_ledger(mut self) -> Self {
        self.ledger = false;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub gamma: f64,
    pub l: f64,
    pub measured: NormEstimate,
    pub predicted: Option<f64>,
}

impl LedgerEntry {
    pub fn measure(
        name: &str,
        s: &MatrixSymbol,
        gamma: f64,
        l: f64,
        grid: &GridSpec,
        predicted: Option<f64>,
    ) -> Result<Self, GaugeError> {
        Ok(LedgerEntry {
            name: name.to_string(),
            gamma,
            l,
            measured: norm_auto(s, gamma, l, grid)?,
            predicted,
        })
    }

    pub fn within_bound(&self) -> bool {
        self.predicted.map_or(true, |p| self.measured.value <= p * (1.0 + 1e-12) + 1e-15)
    }
}

#[derive(Clone, Debug)]
pub struct GaugeReport {
    pub psi: MatrixSymbol,
    pub transformed: MatrixSymbol,
    /// Named summands whose sum is `transformed`.
    pub parts: Vec<(String, MatrixSymbol)>,
    /// Intermediate symbols kept for inspection (ψ_l, B_l, T_l, ...).
    pub components: Vec<(String, MatrixSymbol)>,
    pub series_order: usize,
    pub tail_bound: f64,
    pub ledger: Vec<LedgerEntry>,
    pub warnings: Vec<String>,
    pub scalars: BTreeMap<String, f64>,
}

impl GaugeReport {
    pub fn part(&self, name: &str) -> Option<&MatrixSymbol> {
        self.parts.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn component(&self, name: &str) -> Option<&MatrixSymbol> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Max over probes and frequencies of |transformed − Σ parts| relative
    /// to max(1, |transformed|), entrywise.
    pub fn decomposition_defect(&self, points: &[Vec<f64>]) -> Result<f64, GaugeError> {
        let m = self.transformed.spinor_dim();
        let mut thetas: Vec<Frequency> = self.transformed.frequencies();
        for (_, p) in &self.parts {
            thetas.extend(p.frequencies());
        }
        thetas.sort();
        thetas.dedup();
        let mut worst: f64 = 0.0;
        for x in points {
            let mut ctx = EvalContext::new(x);
            let mut part_ctx: Vec<EvalContext> = self.parts.iter().map(|_| EvalContext::new(x)).collect();
            for t in &thetas {
                let full = self.transformed.eval_in(&mut ctx, t)?.to_matrix(m);
                let mut sum = full.clone() * crate::symbols::C64::new(0.0, 0.0);
                for ((_, p), c) in self.parts.iter().zip(part_ctx.iter_mut()) {
                    sum += p.eval_in(c, t)?.to_matrix(m);
                }
                for (a, b) in full.iter().zip(sum.iter()) {
                    worst = worst.max((a - b).norm() / a.norm().max(1.0));
                }
            }
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let describe = |s: &MatrixSymbol| {
            json!({
                "frequencies": s.frequencies().iter().map(|t| t.to_vec()).collect::<Vec<_>>(),
                "order": s.order,
                "nodes": s.entries().map(|(_, c)| c.node_count()).sum::<usize>(),
            })
        };
        json!({
            "series_order": self.series_order,
            "tail_bound": self.tail_bound,
            "psi": describe(&self.psi),
            "transformed": describe(&self.transformed),
            "parts": self.parts.iter().map(|(n, s)| json!({"name": n, "symbol": describe(s)})).collect::<Vec<_>>(),
            "components": self.components.iter().map(|(n, s)| json!({"name": n, "symbol": describe(s)})).collect::<Vec<_>>(),
            "ledger": self.ledger,
            "warnings": self.warnings,
            "scalars": self.scalars,
        })
    }
}
