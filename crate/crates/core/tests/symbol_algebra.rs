use gaugecalc::symbols::{weight, CMat, Coeff, Frequency, MatrixSymbol, C64};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Term {
    theta: [i8; 2],
    gamma: f64,
    entries: Vec<(f64, f64)>,
    hom: bool,
}

fn term(m: usize) -> impl Strategy<Value = Term> {
    (
        [-2i8..=2, -2i8..=2],
        -1.0f64..1.5,
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m * m),
        any::<bool>(),
    )
        .prop_map(|(theta, gamma, entries, hom)| Term { theta, gamma, entries, hom })
}

fn build(m: usize, terms: &[Term]) -> MatrixSymbol {
    let mut s = MatrixSymbol::zero(2, m);
    for t in terms {
        let mat = CMat::from_fn(m, m, |i, j| {
            let (re, im) = t.entries[i * m + j];
            C64::new(re, im)
        });
        let radial = if t.hom { Coeff::hom(t.gamma.abs()) } else { Coeff::jap(t.gamma) };
        let theta = Frequency::from_f64(&[t.theta[0] as f64, t.theta[1] as f64]);
        s.add_entry(theta, Coeff::product(vec![radial, Coeff::constant(mat)]));
    }
    s
}

fn symbols(n: usize) -> impl Strategy<Value = (usize, Vec<Vec<Term>>)> {
    (1usize..=2).prop_flat_map(move |m| {
        (Just(m), prop::collection::vec(prop::collection::vec(term(m), 1..=3), n))
    })
}

const PROBES: [[f64; 2]; 5] = [[0.0, 0.0], [0.3, -0.7], [2.5, 1.0], [-11.0, 4.0], [60.0, -35.0]];

/// Max over the union of supports and the probe points of |x_θ(ξ) − y_θ(ξ)|,
/// relative to the largest value seen.
fn distance(x: &MatrixSymbol, y: &MatrixSymbol) -> f64 {
    let mut thetas = x.frequencies();
    thetas.extend(y.frequencies());
    thetas.sort();
    thetas.dedup();
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for p in PROBES {
        for t in &thetas {
            let a = x.eval(t, &p).unwrap();
            let b = y.eval(t, &p).unwrap();
            scale = scale.max(a.iter().map(|z| z.norm()).fold(0.0, f64::max));
            diff = diff.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    diff / scale
}

/// Max of |x_θ(ξ)| over the support and the probe points.
fn sup(x: &MatrixSymbol) -> f64 {
    let mut out: f64 = 0.0;
    for p in PROBES {
        for t in x.frequencies() {
            out = out.max(x.eval(&t, &p).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    out
}

fn symmetric(s: &MatrixSymbol) -> MatrixSymbol {
    let half = C64::new(0.5, 0.0);
    MatrixSymbol::linear_combine(&[(half, s), (half, &s.adjoint())]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_is_associative((m, ts) in symbols(3)) {
        let (a, b, c) = (build(m, &ts[0]), build(m, &ts[1]), build(m, &ts[2]));
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(distance(&left, &right) < 1e-12);
    }

    #[test]
    fn adjoint_reverses_products((m, ts) in symbols(2)) {
        let (a, b) = (build(m, &ts[0]), build(m, &ts[1]));
        let left = a.compose(&b).unwrap().adjoint();
        let right = b.adjoint().compose(&a.adjoint()).unwrap();
        prop_assert!(distance(&left, &right) < 1e-12);
        prop_assert!(distance(&a.adjoint().adjoint(), &a) < 1e-14);
    }

    #[test]
    fn commutator_of_symmetric_symbols_is_symmetric((m, ts) in symbols(2)) {
        let (a, b) = (symmetric(&build(m, &ts[0])), symmetric(&build(m, &ts[1])));
        let pts: Vec<Vec<f64>> = PROBES.iter().map(|p| p.to_vec()).collect();
        prop_assert!(a.symmetry_defect(&pts).unwrap() < 1e-12);
        let c = a.ad(&b).unwrap();
        let scale = 1.0 + sup(&c);
        prop_assert!(c.symmetry_defect(&pts).unwrap() / scale < 1e-12);
    }

    #[test]
    fn commutator_antisymmetry_and_jacobi((m, ts) in symbols(3)) {
        let (a, b, c) = (build(m, &ts[0]), build(m, &ts[1]), build(m, &ts[2]));
        let ab = a.ad(&b).unwrap();
        let ba = b.ad(&a).unwrap();
        prop_assert!(distance(&ab, &ba.scale(C64::new(-1.0, 0.0))) < 1e-12);
        let j = MatrixSymbol::linear_combine(&[
            (C64::new(1.0, 0.0), &ab.ad(&c).unwrap()),
            (C64::new(1.0, 0.0), &b.ad(&c).unwrap().ad(&a).unwrap()),
            (C64::new(1.0, 0.0), &c.ad(&a).unwrap().ad(&b).unwrap()),
        ])
        .unwrap();
        let scale = 1.0 + sup(&ab.ad(&c).unwrap());
        prop_assert!(sup(&j) / scale < 1e-11);
    }

    #[test]
    fn peetre_inequality(x in prop::array::uniform2(-1e3f64..1e3), y in prop::array::uniform2(-1e3f64..1e3), s in -3.0f64..3.0) {
        let sum = [x[0] + y[0], x[1] + y[1]];
        let lhs = weight(&sum).powf(s);
        let rhs = weight(&y).powf(s.abs()) * weight(&x).powf(s);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}

#[test]
fn identity_is_neutral() {
    let a = MatrixSymbol::principal(2, 2, Coeff::jap(1.0))
        .with_entry(Frequency::from_f64(&[1.0, 0.0]), Coeff::coord(0));
    let id = MatrixSymbol::identity(2, 2);
    assert!(distance(&id.compose(&a).unwrap(), &a) < 1e-15);
    assert!(distance(&a.compose(&id).unwrap(), &a) < 1e-15);
}
