//! One function per subcommand. Each returns the artifacts it wrote.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, GaugeVariant, UncoupleModeSpec};
use super::output::OutputDir;
use super::CliError;
use crate::clifford::{build_generators, conjugate_dirac, diagonalizing_unitary};
use crate::gauge::{one_step_weak, parallel_transform, uncouple_system, GaugeOptions, ResonanceSpec, UncoupleMode};
use crate::geometry::{
    counting_certificate, find_good_point, mc_volume, overlap_exponent, region_membership, Region,
    ResonanceGeometryConfig,
};
use crate::numeric::loglog_slope;
use crate::spectra::{
    assemble_fiber, band_table, bracket_check, bs_scan, ids, overlap_zeta, trusted_window,
    BandTable, Interval, KGrid,
};
use crate::symbols::{EvalContext, MatrixSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Bands,
    Ids,
    Overlap,
    BsScan,
    Gauge,
    Uncouple,
    Geometry,
    Verify,
}

pub struct RunContext {
    pub seed: Option<u64>,
    pub verbose: bool,
}

pub fn run_command(cmd: Command, cfg: &ExperimentConfig, out: &OutputDir, rc: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    match cmd {
        Command::Bands => bands(cfg, out),
        Command::Ids => ids_cmd(cfg, out),
        Command::Overlap => overlap(cfg, out),
        Command::BsScan => scan(cfg, out),
        Command::Gauge => gauge(cfg, out, rc),
        Command::Uncouple => uncouple(cfg, out, rc),
        Command::Geometry => geometry(cfg, out, rc),
        Command::Verify => verify(cfg, out, rc),
    }
}

fn table(cfg: &ExperimentConfig) -> Result<BandTable, CliError> {
    let sp = cfg.require_spectra()?;
    Ok(band_table(&cfg.periodic_model()?, &sp.grid(), sp.radius)?)
}

fn bands(cfg: &ExperimentConfig, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let sp = cfg.require_spectra()?;
    let model = cfg.periodic_model()?;
    let t = match &sp.k_points {
        None => band_table(&model, &sp.grid(), sp.radius)?,
        Some(ks) => {
            let eigenvalues = ks
                .iter()
                .map(|k| assemble_fiber(&model, k, sp.radius).map(|f| f.eigenvalues()))
                .collect::<Result<Vec<_>, _>>()?;
            let (window, window_rule) = trusted_window(&model, sp.radius)?;
            BandTable {
                grid: KGrid { n: vec![ks.len()], offset: 0.0 },
                radius: sp.radius,
                ks: ks.clone(),
                eigenvalues,
                window,
                window_rule,
                cell_volume: model.lattice.cell_volume(),
            }
        }
    };
    Ok(vec![out.write_text("bands.csv", &t.to_csv())?])
}

fn ids_cmd(cfg: &ExperimentConfig, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let t = table(cfg)?;
    let sp = cfg.require_spectra()?;
    let rows = sp
        .lambda
        .points()
        .into_iter()
        .map(|l| {
            Ok(json!({
                "lambda": l,
                "positive": ids(&t, &Interval::positive(l))?,
                "negative": ids(&t, &Interval::negative(l))?,
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let doc = json!({"window": t.window, "windowRule": t.window_rule, "cellVolume": t.cell_volume, "rows": rows});
    Ok(vec![out.write_json("ids.json", &doc)?])
}

fn overlap(cfg: &ExperimentConfig, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let t = table(cfg)?;
    let sp = cfg.require_spectra()?;
    let rows = sp
        .lambda
        .points()
        .into_iter()
        .map(|l| Ok(json!({"lambda": l, "overlap": overlap_zeta(&t, l)?})))
        .collect::<Result<Vec<_>, CliError>>()?;
    let doc = json!({"window": t.window, "rows": rows});
    Ok(vec![out.write_json("overlap.json", &doc)?])
}

fn scan(cfg: &ExperimentConfig, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let t = table(cfg)?;
    let l = &cfg.require_spectra()?.lambda;
    let s = bs_scan(&t, l.lo, l.hi, l.n)?;
    Ok(vec![out.write_json("bs_scan.json", &json!({"window": t.window, "scan": s}))?])
}

fn gauge_options(cfg: &ExperimentConfig) -> Result<GaugeOptions, CliError> {
    let g = cfg.require_gauge()?;
    let mut o = GaugeOptions::new(cfg.model.d).with_beta(g.beta);
    o.series_order = g.series_order;
    o.l = g.l;
    o.ledger = g.ledger;
    o.trim_radius = g.trim_radius;
    Ok(o)
}

fn log(rc: &RunContext, msg: &str) {
    if rc.verbose {
        eprintln!("{msg}");
    }
}

fn gauge(cfg: &ExperimentConfig, out: &OutputDir, rc: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let g = cfg.require_gauge()?;
    let a = cfg.symbol()?;
    let spec = ResonanceSpec::scalar(g.delta, g.s);
    let opts = gauge_options(cfg)?;
    let report = match g.variant {
        GaugeVariant::Weak => one_step_weak(&a, &spec, &opts)?,
        GaugeVariant::Parallel => parallel_transform(&a, &spec, g.k_tilde, &opts)?,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    log(rc, &format!("gauge: series order {}, tail bound {:e}", report.series_order, report.tail_bound));
    let doc = json!({"variant": g.variant, "report": report.to_json()});
    Ok(vec![out.write_json("gauge.json", &doc)?])
}

fn uncouple(cfg: &ExperimentConfig, out: &OutputDir, rc: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let g = cfg.require_gauge()?;
    let p = cfg
        .model
        .principal
        .as_ref()
        .ok_or_else(|| CliError::Config("uncouple needs model.principal".into()))?;
    let a = cfg.symbol()?;
    let mode = match g.mode {
        UncoupleModeSpec::Onestep => UncoupleMode::OneStep,
        UncoupleModeSpec::Full => UncoupleMode::Full(g.n as u32),
    };
    let spec = ResonanceSpec::scalar(g.delta, g.s);
    let report = uncouple_system(&a, &p.exponents, p.alpha, &spec, mode, g.eps_trim, &gauge_options(cfg)?)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    log(rc, &format!("uncouple: s' = {:?}", report.scalars.get("s_prime")));
    let doc = json!({"mode": g.mode, "report": report.to_json()});
    Ok(vec![out.write_json("uncouple.json", &doc)?])
}

#[derive(Serialize)]
struct RhoRow {
    rho: f64,
    delta: f64,
    vol_a: crate::geometry::VolumeEstimate,
    vol_z: crate::geometry::VolumeEstimate,
    ratio: f64,
    warnings: Vec<String>,
}

fn geometry_at(base: &ResonanceGeometryConfig, rho: f64, delta: Option<f64>) -> Result<ResonanceGeometryConfig, CliError> {
    let mut c = base.with_rho(rho)?;
    if let Some(d) = delta {
        c = c.with_delta(d);
    }
    Ok(c)
}

fn geometry(cfg: &ExperimentConfig, out: &OutputDir, rc: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let g = cfg.require_geometry()?;
    let seed = rc.seed.unwrap_or(g.seed);
    let mut base = g.base.clone();
    base.prepare()?;
    let s = overlap_exponent(base.d, base.alpha);
    let rhos = if g.rhos.is_empty() { vec![base.rho] } else { g.rhos.clone() };
    let mut rows = Vec::new();
    for &rho in &rhos {
        let c = geometry_at(&base, rho, g.delta_factor.map(|f| f * rho.powf(s)))?;
        let vol_a = mc_volume(&c, &Region::A { j: None, enlarged: false }, g.n_samples, seed)?;
        let vol_z = mc_volume(&c, &Region::Z { j: None, enlarged: false }, g.n_samples, seed)?;
        let ratio = if vol_a.estimate > 0.0 { vol_z.estimate / vol_a.estimate } else { f64::NAN };
        log(rc, &format!("geometry: rho {rho}, vol(A) {:e}, vol(Z)/vol(A) {ratio:e}", vol_a.estimate));
        rows.push(RhoRow { rho, delta: c.delta, vol_a, vol_z, ratio, warnings: c.validate() });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let fit = loglog_slope(&xs, &ys).map(|(slope, residual)| json!({"epsilon0": -slope, "residual": residual}));
    let mut doc = json!({
        "overlapExponent": s,
        "expectedEpsilon0": base.nu - base.d as f64 * base.kappa,
        "rows": rows,
        "fit": fit,
        "seed": seed,
    });
    if g.certificate {
        let base = geometry_at(&base, base.rho, g.delta_factor.map(|f| f * base.rho.powf(s)))?;
        let point = find_good_point(&base, seed, g.max_iters)?;
        let sp = cfg.require_spectra()?;
        let model = cfg.periodic_model()?;
        let cert = counting_certificate(&base, &point.xi, &model, sp.radius)?;
        let t = band_table(&model, &sp.grid(), sp.radius)?;
        let zeta = overlap_zeta(&t, base.energy())?;
        doc["goodPoint"] = serde_json::to_value(&point).map_err(|e| CliError::Numerical(e.to_string()))?;
        doc["certificate"] = serde_json::to_value(&cert).map_err(|e| CliError::Numerical(e.to_string()))?;
        doc["overlapAtEnergy"] = serde_json::to_value(zeta).map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    Ok(vec![out.write_json("geometry.json", &doc)?])
}

#[derive(Serialize)]
struct Check {
    name: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), residual, tolerance, pass: residual <= tolerance, note: None }
    }

    fn flag(name: &str, ok: bool, note: String) -> Self {
        Check {
            name: name.into(),
            residual: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: ok,
            note: Some(note),
        }
    }
}

fn probes(d: usize, n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(-scale..scale)).collect()).collect()
}

fn rel_defect(a: &MatrixSymbol, b: &MatrixSymbol, points: &[Vec<f64>]) -> Result<f64, CliError> {
    let m = a.spinor_dim();
    let mut thetas = a.frequencies();
    thetas.extend(b.frequencies());
    thetas.sort();
    thetas.dedup();
    let mut worst: f64 = 0.0;
    for p in points {
        let (mut ca, mut cb) = (EvalContext::new(p), EvalContext::new(p));
        for t in &thetas {
            let x = a.eval_in(&mut ca, t)?.to_matrix(m);
            let y = b.eval_in(&mut cb, t)?.to_matrix(m);
            let scale = x.iter().chain(y.iter()).map(|z| z.norm()).fold(1.0, f64::max);
            let diff = (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max);
            worst = worst.max(diff / scale);
        }
    }
    Ok(worst)
}

fn verify(cfg: &ExperimentConfig, out: &OutputDir, rc: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let seed = rc.seed.or(cfg.geometry.as_ref().map(|g| g.seed)).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = cfg.model.d;
    let m = cfg.model.m;
    let mut checks = Vec::new();

    let canon = cfg.canonical()?;
    let again = canon.canonical()?;
    let same = canon.model.entries == again.model.entries;
    checks.push(Check::flag("dsl_round_trip", same, format!("{} entries", canon.model.entries.len())));

    let a = cfg.symbol()?;
    let pts = probes(d, 50, 20.0, &mut rng);
    checks.push(Check::new("symbol_hermitian", a.symmetry_defect(&pts)?, 1e-12));
    checks.push(Check::new("adjoint_involution", rel_defect(&a.adjoint().adjoint(), &a, &pts)?, 1e-14));
    let aa = a.compose(&a)?;
    let left = aa.compose(&a)?;
    let right = a.compose(&aa)?;
    checks.push(Check::new("composition_associative", rel_defect(&left, &right, &pts[..10])?, 1e-12));

    if let Ok(rep) = build_generators(d) {
        checks.push(Check::new("clifford_relations", rep.relation_defect(), 0.0));
        if rep.m == m {
            let u = diagonalizing_unitary(&rep);
            let uu = u.compose(&u.adjoint())?;
            checks.push(Check::new("unitary", rel_defect(&uu, &MatrixSymbol::identity(d, m), &pts)?, 1e-14));
            let conj = conjugate_dirac(&rep, cfg.model.mass)?;
            let far: Vec<Vec<f64>> = probes(d, 200, 1e3, &mut rng)
                .into_iter()
                .filter(|p| p.iter().map(|x| x * x).sum::<f64>() >= 1.0)
                .collect();
            checks.push(Check::new(
                "dirac_diagonalization",
                rel_defect(&conj.conjugated, &conj.diagonalized, &far)?,
                1e-12,
            ));
        }
    }

    if cfg.gauge.is_some() {
        let g = cfg.require_gauge()?;
        let opts = gauge_options(cfg)?.without_ledger();
        let report = one_step_weak(&a, &ResonanceSpec::scalar(g.delta, g.s), &opts)?;
        checks.push(Check::new("gauge_decomposition", report.decomposition_defect(&pts[..10])?, 1e-10));
    }

    if let (Some(sp), true) = (&cfg.spectra, matches!(cfg.model.lattice, super::config::LatticeSpec::Basis(_))) {
        let model = cfg.periodic_model()?;
        let k: Vec<f64> = model.lattice.cell_point(&vec![0.1; d]);
        let fiber = assemble_fiber(&model, &k, sp.radius)?;
        checks.push(Check::new("fiber_hermitian", fiber.hermiticity_defect(), 1e-12));
        let t = band_table(&model, &sp.grid(), sp.radius)?;
        let lam = 0.9 * t.window.min(sp.lambda.hi.abs().max(1.0));
        let mid = lam / 2.0;
        let whole = ids(&t, &Interval::positive(lam))?;
        let split = ids(&t, &Interval::positive(mid))?
            + ids(&t, &Interval { lo: mid, hi: lam, lo_closed: true, hi_closed: false })?;
        checks.push(Check::new("ids_additivity", (whole - split).abs(), 1e-12 * whole.abs().max(1.0)));
        if let (Some(eps), super::config::BaseSymbol::Dirac) = (sp.perturbation_bound, cfg.model.base) {
            let rep = build_generators(d)?;
            let free = model.with_symbol(crate::clifford::free_dirac_symbol(&rep, cfg.model.mass))?;
            let t0 = band_table(&free, &sp.grid(), sp.radius)?;
            let r = bracket_check(&t0, &t, eps, sp.intervals, seed)?;
            checks.push(Check::flag(
                "perturbation_bracket",
                r.pass,
                format!("{} intervals, {} violations", r.intervals.len(), r.violations.len()),
            ));
        }
    }

    if let Some(g) = &cfg.geometry {
        let mut c = g.base.clone();
        c.prepare()?;
        let r = c.energy().powf(1.0 / c.alpha);
        let mut bad = 0usize;
        for _ in 0..2000 {
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let rad = r * rng.gen_range(0.9..1.1);
            let mut xi = vec![0.0; d];
            xi[0] = rad * ang.cos();
            if d > 1 {
                xi[1] = rad * ang.sin();
            }
            for j in 0..c.m() {
                let mb = region_membership(&c, &xi, j, false)?;
                if mb.in_a != (mb.in_z ^ mb.in_g) || (mb.in_z && mb.in_g) {
                    bad += 1;
                }
            }
        }
        checks.push(Check::new("region_partition", bad as f64, 0.0));
        let region = Region::A { j: None, enlarged: false };
        let v1 = mc_volume(&c, &region, 4096, seed)?;
        let v2 = mc_volume(&c, &region, 4096, seed)?;
        checks.push(Check::flag("mc_determinism", v1.hits == v2.hits, format!("{} hits", v1.hits)));
    }

    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        log(rc, &format!("{} {} residual {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.residual));
    }
    let doc = json!({"pass": pass, "seed": seed, "checks": checks});
    let path = out.write_json("verify.json", &doc)?;
    if pass {
        Ok(vec![path])
    } else {
        let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}
