//! Operator identities on random fields from the span of the Stokes modes.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use sdns_core::{BasisSet, BumpParams, DiskGrid, NoiseModel, Operators, VectorField, VectorJet};

struct Setup {
    ops: Operators,
    bases: Vec<BasisSet>,
    xi: Vec<VectorJet>,
}

const ALPHAS: [f64; 3] = [2.0, 3.0, 5.0];
const N: usize = 16;

fn setup() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = Arc::new(DiskGrid::new(96, 64).unwrap());
        let bases = ALPHAS
            .iter()
            .map(|&a| BasisSet::build(a, N, grid.clone()).unwrap())
            .collect();
        let noise = NoiseModel::build(8, 0.5, 1.5, BumpParams::default()).unwrap();
        let xi = noise.fields.iter().map(|f| f.jet(&grid)).collect();
        Setup {
            ops: Operators::new(grid).unwrap(),
            bases,
            xi,
        }
    })
}

fn norm(ops: &Operators, f: &VectorField) -> f64 {
    ops.inner_l2(f, f).sqrt()
}

fn scalar_norm(ops: &Operators, s: &[f64]) -> f64 {
    ops.grid().integrate_product(s, s).sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A span field plus the gradient of a random cubic, so that the
/// projection has something to remove.
fn mixed_field(s: &Setup, c: &[f64], p: &[f64]) -> VectorField {
    let mut f = s.bases[1].synthesize(c).unwrap();
    let g = s.ops.grid().sample(|r, t| {
        let (x, y) = (r * t.cos(), r * t.sin());
        p[0] * x + p[1] * y + p[2] * x * y + p[3] * x * x + p[4] * y * y * y + p[5] * x * x * y
    });
    let [gx, gy] = s.ops.gradient(&g);
    f.axpy(1.0, &VectorField::from_parts(s.ops.grid(), gx, gy));
    f
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn leray_is_an_orthogonal_projection(c in coeffs(), p in prop::collection::vec(-1.0f64..1.0, 6)) {
        let s = setup();
        let f = mixed_field(s, &c, &p);
        let pf = s.ops.leray_project(&f).unwrap();
        let ppf = s.ops.leray_project(&pf).unwrap();
        let idem = norm(&s.ops, &ppf.sub(&pf)) / norm(&s.ops, &pf);
        prop_assert!(idem < 1e-9, "idempotence defect {idem:e}");
        let ortho = s.ops.inner_l2(&pf, &f.sub(&pf)).abs() / s.ops.inner_l2(&f, &f);
        prop_assert!(ortho < 1e-8, "orthogonality defect {ortho:e}");
        let curl_f = s.ops.curl(&f).data;
        let curl_pf = s.ops.curl(&pf).data;
        let rel = scalar_norm(&s.ops, &diff(&curl_pf, &curl_f)) / scalar_norm(&s.ops, &curl_f);
        prop_assert!(rel < 1e-7, "curl defect {rel:e}");
    }

    #[test]
    fn greens_identity_holds_on_the_span(c in coeffs(), d in coeffs(), which in 0usize..3) {
        let s = setup();
        let alpha = ALPHAS[which];
        let f = s.bases[which].synthesize(&c).unwrap();
        let phi = s.bases[which].synthesize(&d).unwrap();
        let scale = (s.ops.inner_h1(&f, &f) * s.ops.inner_h1(&phi, &phi)).sqrt();
        let rel = s.ops.greens_defect(&f, &phi, alpha) / scale;
        prop_assert!(rel < 1e-6, "alpha {alpha}: Green defect {rel:e}");
    }

    #[test]
    fn transport_is_antisymmetric(c in coeffs(), d in coeffs(), e in coeffs()) {
        let s = setup();
        let b = &s.bases[0];
        let (phi, f, g) = (b.synthesize(&c).unwrap(), b.synthesize(&d).unwrap(), b.synthesize(&e).unwrap());
        let h1 = |v: &VectorField| s.ops.inner_h1(v, v).sqrt();
        let rel = s.ops.nonlinear_antisymmetry_defect(&phi, &f, &g).unwrap() / (h1(&phi) * h1(&f) * h1(&g));
        prop_assert!(rel < 1e-7, "antisymmetry defect {rel:e}");
    }

    #[test]
    fn salt_commutes_with_curl(c in coeffs(), i in 0usize..8) {
        let s = setup();
        let phi = s.bases[0].synthesize(&c).unwrap();
        let xi = &s.xi[i];
        let rhs = s.ops.advect_scalar(&xi.value, &s.ops.curl(&phi)).unwrap();
        let rel = s.ops.curl_commute_defect(xi, &phi).unwrap() / scalar_norm(&s.ops, &rhs.data);
        prop_assert!(rel < 1e-5, "xi_{}: commutator defect {rel:e}", i + 1);
    }

    #[test]
    fn projected_salt_squares_consistently(c in coeffs(), i in 0usize..8) {
        let s = setup();
        let phi = s.bases[0].synthesize(&c).unwrap();
        let xi = &s.xi[i];
        let b_phi = s.ops.salt_b(xi, &phi).unwrap();
        let direct = s.ops.leray_project(&s.ops.salt_b(xi, &b_phi).unwrap()).unwrap();
        let pb_phi = s.ops.leray_project(&b_phi).unwrap();
        let twice = s.ops.leray_project(&s.ops.salt_b(xi, &pb_phi).unwrap()).unwrap();
        let rel = norm(&s.ops, &direct.sub(&twice)) / norm(&s.ops, &direct);
        prop_assert!(rel < 1e-5, "xi_{}: defect {rel:e}", i + 1);
    }
}

#[test]
fn interpolation_ratios_stay_finite() {
    let s = setup();
    let b = &s.bases[1];
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let (mut lady, mut trace) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let draw = |r: &mut proptest::test_runner::TestRunner| {
            b.synthesize(&coeffs().new_tree(r).unwrap().current())
                .unwrap()
        };
        let (phi, f, g) = (draw(&mut runner), draw(&mut runner), draw(&mut runner));
        let l = s.ops.ladyzhenskaya_ratio(&phi, &f, &g).unwrap();
        let t = s.ops.trace_ratio(&f);
        assert!(l.is_finite() && t.is_finite());
        lady = lady.max(l);
        trace = trace.max(t);
    }
    println!("empirical Ladyzhenskaya constant {lady:.4}, trace constant {trace:.4}");
}

#[test]
fn greens_identity_for_every_mode_pair() {
    let s = setup();
    for (b, &alpha) in s.bases.iter().zip(&ALPHAS) {
        for j in 0..N {
            for k in 0..N {
                let (f, phi) = (b.sample(j), b.sample(k));
                let scale = (s.ops.inner_h1(f, f) * s.ops.inner_h1(phi, phi)).sqrt();
                let rel = s.ops.greens_defect(f, phi, alpha) / scale;
                assert!(rel < 1e-6, "alpha {alpha} ({j},{k}): {rel:e}");
            }
        }
        let a1 = b.sample(0);
        let defect = s.ops.greens_defect(a1, a1, alpha);
        assert!(
            defect < 1e-7 * b.modes()[0].lambda,
            "alpha {alpha}: {defect:e}"
        );
        let zero = VectorField::zeros(s.ops.grid());
        assert_eq!(
            s.ops
                .greens_defect(&b.synthesize(&[0.3; N]).unwrap(), &zero, alpha),
            0.0
        );
    }
}

#[test]
fn self_transport_vanishes() {
    let s = setup();
    let b = &s.bases[0];
    let (phi, f) = (b.sample(0), b.sample(1));
    let h1 = |v: &VectorField| s.ops.inner_h1(v, v).sqrt();
    let tri = s.ops.inner_l2(&s.ops.advect(phi, f).unwrap(), f).abs();
    assert!(tri < 1e-8 * h1(phi) * h1(f).powi(2), "{tri:e}");
    let zero = VectorField::zeros(s.ops.grid());
    assert_eq!(
        s.ops.nonlinear_antisymmetry_defect(&zero, f, phi).unwrap(),
        0.0
    );
}

#[test]
fn advecting_a_constant_gives_zero() {
    let s = setup();
    let phi = s.bases[0].synthesize(&[0.5; N]).unwrap();
    let f = VectorField::from_fn(s.ops.grid(), |_, _| [1.5, -2.0]);
    assert!(s.ops.advect(&phi, &f).unwrap().max_abs() < 1e-11);
}

#[test]
fn salt_energy_identity() {
    let s = setup();
    let f = s.bases[0]
        .synthesize(&[
            0.4, -0.2, 0.7, 0.1, 0.0, 0.3, -0.5, 0.2, 0.1, 0.0, -0.1, 0.2, 0.0, 0.05, 0.1, -0.3,
        ])
        .unwrap();
    for xi in &s.xi {
        let bf = s.ops.salt_b(xi, &f).unwrap();
        let tf = s.ops.salt_t(xi, &f).unwrap();
        let lhs = 2.0 * s.ops.inner_l2(&bf, &f);
        let rhs = 2.0 * s.ops.inner_l2(&tf, &f);
        let scale = norm(&s.ops, &bf) * norm(&s.ops, &f);
        assert!(
            (lhs - rhs).abs() < 1e-7 * scale,
            "{:e}",
            (lhs - rhs).abs() / scale
        );
    }
    let constant = s
        .ops
        .jet(&VectorField::from_fn(s.ops.grid(), |_, _| [0.2, 0.9]));
    let b = s.ops.salt_b(&constant, &f).unwrap();
    let a = s.ops.advect(&constant.value, &f).unwrap();
    assert!(b.sub(&a).max_abs() < 1e-12);
}

#[test]
fn curl_identities() {
    // Radial differentiation roundoff grows like n_r⁴, so the exact
    // identities are checked on a grid sized to the test function.
    let ops = Operators::new(Arc::new(DiskGrid::new(24, 32).unwrap())).unwrap();
    let g = ops
        .grid()
        .sample(|r, t| (r * t.cos()).sin() * (0.5 * r * t.sin()).exp());
    let [gx, gy] = ops.gradient(&g);
    let grad = VectorField::from_parts(ops.grid(), gx, gy);
    let curl = ops.curl(&grad).data;
    assert!(
        max_abs(&curl) < 1e-9,
        "curl of gradient {:e}",
        max_abs(&curl)
    );
    let proj = ops.leray_project(&grad).unwrap();
    assert!(norm(&ops, &proj) < 1e-7 * norm(&ops, &grad));

    let psi = sdns_core::ScalarField::from_data(ops.grid(), g.clone());
    let lap = ops.laplacian(&g);
    let cgp = ops.curl(&ops.grad_perp(&psi)).data;
    let rel = max_abs(&diff(&cgp, &lap)) / max_abs(&lap);
    assert!(rel < 1e-6, "curl grad_perp {rel:e}");

    let rot = VectorField::from_fn(ops.grid(), |x, y| [-y, x]);
    assert!(ops.curl(&rot).data.iter().all(|v| (v - 2.0).abs() < 1e-10));
}

#[test]
fn projection_fixes_modes_and_stokes_routes_agree() {
    let s = setup();
    for b in &s.bases {
        for k in 0..N {
            let a = b.sample(k);
            let p = s.ops.leray_project(a).unwrap();
            assert!(norm(&s.ops, &p.sub(a)) < 1e-8, "mode {k}");
        }
        let c: Vec<f64> = (0..N)
            .map(|k| ((k * 7 % 5) as f64 - 2.0) / (1.0 + k as f64))
            .collect();
        let grid_route = s.ops.stokes_apply(&b.synthesize(&c).unwrap()).unwrap();
        let lc: Vec<f64> = c.iter().zip(b.lambdas()).map(|(c, l)| c * l).collect();
        let coeff_route = b.synthesize(&lc).unwrap();
        let rel = norm(&s.ops, &grid_route.sub(&coeff_route)) / norm(&s.ops, &coeff_route);
        assert!(rel < 1e-6, "alpha {}: {rel:e}", b.alpha());
    }
    let zero = VectorField::zeros(s.ops.grid());
    assert_eq!(s.ops.stokes_apply(&zero).unwrap().max_abs(), 0.0);
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn library_fields_commute_with_curl_on_a_mode() {
    let s = setup();
    let phi = s.bases[0].sample(1);
    let curl = s.ops.curl(phi).data;
    let [gx, gy] = s.ops.gradient(&curl);
    let h1 = (s.ops.grid().integrate_product(&gx, &gx) + s.ops.grid().integrate_product(&gy, &gy))
        .sqrt();
    for (i, xi) in s.xi.iter().enumerate() {
        let d = s.ops.curl_commute_defect(xi, phi).unwrap();
        assert!(d < 1e-5 * h1, "xi_{}: {d:e}", i + 1);
    }
    let zero = s.ops.jet(&VectorField::zeros(s.ops.grid()));
    assert_eq!(s.ops.curl_commute_defect(&zero, phi).unwrap(), 0.0);
}
