use std::f64::consts::PI;

use gaugecalc::clifford::{build_generators, conjugate_dirac, cos_scalar, diagonalizing_unitary, free_dirac_symbol, tensor_const};
use gaugecalc::geometry::{mc_volume, region_membership, FrequencySpec, Region, ResonanceGeometryConfig};
use gaugecalc::spectra::{assemble_fiber, band_table, ids, Interval, KGrid, Lattice, PeriodicModel};
use gaugecalc::symbols::{CMat, Frequency, C64};
use proptest::prelude::*;

fn dirac_cos(eps: f64) -> PeriodicModel {
    let rep = build_generators(2).unwrap();
    let s = free_dirac_symbol(&rep, 0.0)
        .add(&tensor_const(&cos_scalar(&[2.0 * PI, 0.0], eps / 2.0), &rep.identity()))
        .unwrap();
    PeriodicModel::new(Lattice::integer(2), s).unwrap()
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn geometry(rho: f64) -> ResonanceGeometryConfig {
    ResonanceGeometryConfig::new(
        2,
        vec![1.0],
        2.0,
        rho,
        1.0,
        0.2,
        0.95,
        FrequencySpec::Lattice { basis: vec![vec![1.0, 0.0], vec![0.0, 1.0]], radius: 3.0 },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fibers_are_hermitian(k in prop::array::uniform2(-PI..PI), eps in 0.0f64..0.5) {
        let f = assemble_fiber(&dirac_cos(eps), &k, 12.0).unwrap();
        prop_assert!(f.hermiticity_defect() < 1e-13);
    }

    #[test]
    fn free_dirac_squares_to_the_laplacian(x in prop::array::uniform3(-50.0f64..50.0), mass in 0.0f64..3.0) {
        let rep = build_generators(3).unwrap();
        let d = free_dirac_symbol(&rep, mass);
        let sq = d.compose(&d).unwrap();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let expected = rep.identity() * C64::new(r2 + mass * mass, 0.0);
        let got = sq.eval(&Frequency::zero(3), &x).unwrap();
        prop_assert!(max_abs(&(got - expected)) <= 1e-12 * (1.0 + r2));
    }

    #[test]
    fn diagonalizing_symbol_is_unitary(x in prop::array::uniform2(-1e3f64..1e3)) {
        let rep = build_generators(2).unwrap();
        let u = diagonalizing_unitary(&rep);
        let uu = u.compose(&u.adjoint()).unwrap();
        let got = uu.eval(&Frequency::zero(2), &x).unwrap();
        prop_assert!(max_abs(&(got - rep.identity())) < 1e-14);
    }

    #[test]
    fn ids_is_additive(split in 0.5f64..5.5, lo in -6.0f64..-0.5) {
        let t = band_table(&dirac_cos(0.1), &KGrid::uniform(2, 4), 20.0).unwrap();
        let whole = ids(&t, &Interval { lo, hi: 6.0, lo_closed: true, hi_closed: false }).unwrap();
        let left = ids(&t, &Interval { lo, hi: split, lo_closed: true, hi_closed: false }).unwrap();
        let right = ids(&t, &Interval { lo: split, hi: 6.0, lo_closed: true, hi_closed: false }).unwrap();
        prop_assert!((whole - left - right).abs() < 1e-12);
    }

    #[test]
    fn resonance_regions_partition_the_annulus(r in 395.0f64..405.0, phi in 0.0f64..(2.0 * PI)) {
        let cfg = geometry(20.0);
        let xi = [r.sqrt() * phi.cos(), r.sqrt() * phi.sin()];
        let m = region_membership(&cfg, &xi, 0, false).unwrap();
        prop_assert_eq!(m.in_a, m.in_z ^ m.in_g);
        prop_assert!(!(m.in_z && m.in_g));
    }
}

#[test]
fn clifford_relations_hold_exactly() {
    for d in 2..=8 {
        let rep = build_generators(d).unwrap();
        assert_eq!(rep.relation_defect(), 0.0, "d = {d}");
        assert_eq!(rep.m, 1 << d.div_ceil(2));
    }
}

#[test]
fn conjugated_dirac_is_diagonal_away_from_the_origin() {
    let rep = build_generators(2).unwrap();
    let c = conjugate_dirac(&rep, 0.0).unwrap();
    for x in [[3.0, 4.0], [-0.6, 0.8], [100.0, -1.0]] {
        let got = c.conjugated.eval(&Frequency::zero(2), &x).unwrap();
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        assert!(max_abs(&(got - &rep.grading * C64::new(r, 0.0))) < 1e-12);
    }
    let inside = c.residual.eval(&Frequency::zero(2), &[0.3, 0.2]).unwrap();
    assert!(max_abs(&inside) > 0.1);
}

#[test]
fn monte_carlo_is_seed_deterministic() {
    let cfg = geometry(30.0);
    let region = Region::Z { j: None, enlarged: false };
    let a = mc_volume(&cfg, &region, 5000, 11).unwrap();
    let b = mc_volume(&cfg, &region, 5000, 11).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.hits, b.hits);
}

#[test]
fn annulus_volume_matches_its_area() {
    let cfg = geometry(40.0);
    let v = mc_volume(&cfg, &Region::A { j: None, enlarged: false }, 20_000, 3).unwrap();
    assert!((v.estimate - 2.0 * PI).abs() < 4.0 * v.stderr.max(1e-12), "{v:?}");
}

#[test]
fn zero_perturbation_leaves_free_spectrum() {
    let free = dirac_cos(0.0);
    let f = assemble_fiber(&free, &[0.3, 0.0], 10.0).unwrap();
    let ev = f.eigenvalues();
    assert!(ev.iter().any(|&e| (e - 0.3).abs() < 1e-12));
    assert!(ev.iter().any(|&e| (e + 0.3).abs() < 1e-12));
}
