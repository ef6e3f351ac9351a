use std::sync::{Arc, OnceLock};

use sdns_core::oracle::observed_order;
use sdns_core::{
    run_vorticity, run_vorticity_trajectory, run_with_path, sample_path, viscosity_sweep, BasisSet,
    BrownianPath, BumpParams, DiskGrid, GalerkinModel, InitialCondition, NoiseModel, Operators,
    ScalarField, SimConfig, VorticityModel,
};

fn grid() -> Arc<DiskGrid> {
    static CELL: OnceLock<Arc<DiskGrid>> = OnceLock::new();
    CELL.get_or_init(|| Arc::new(DiskGrid::new(96, 64).unwrap()))
        .clone()
}

fn noise() -> &'static NoiseModel {
    static CELL: OnceLock<NoiseModel> = OnceLock::new();
    CELL.get_or_init(|| NoiseModel::build(8, 0.5, 1.5, BumpParams::default()).unwrap())
}

fn noisy() -> &'static VorticityModel {
    static CELL: OnceLock<VorticityModel> = OnceLock::new();
    CELL.get_or_init(|| VorticityModel::build(16, grid(), noise()).unwrap())
}

fn quiet() -> &'static VorticityModel {
    static CELL: OnceLock<VorticityModel> = OnceLock::new();
    CELL.get_or_init(|| VorticityModel::build(16, grid(), &NoiseModel::none()).unwrap())
}

fn random_coeffs(seed: u64, n: usize) -> Vec<f64> {
    sample_path(seed, 1, 1.0, n).increments
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn velocity_curl_reproduces_vorticity() {
    let m = noisy();
    for seed in 0..10 {
        let w = m.basis.synthesize(&random_coeffs(seed, 16)).unwrap();
        let u = m.velocity_from_vorticity(&w).unwrap();
        let curl = m.ops.curl(&u);
        let err: Vec<f64> = curl.data.iter().zip(&w.data).map(|(a, b)| a - b).collect();
        let rel = max_abs(&err) / max_abs(&w.data);
        assert!(rel < 1e-8, "seed {seed}: {rel:e}");
        let trace = m.ops.boundary_trace(&u);
        assert!(max_abs(&trace.normal) < 1e-10 * u.max_abs());
    }
}

#[test]
fn first_mode_maps_to_the_first_stokes_mode() {
    let m = noisy();
    let mut c = vec![0.0; 16];
    c[0] = 1.0;
    let w = m.basis.synthesize(&c).unwrap();
    let u = m.velocity_from_vorticity(&w).unwrap();
    let a = m.velocity_basis.synthesize(&{
        let mut e = vec![0.0; 16];
        e[0] = 1.0;
        e
    });
    let a = a.unwrap();
    // u = −a / σ
    let mut diff = u.clone();
    diff.axpy(1.0 / m.sigmas[0], &a);
    assert!(diff.max_abs() < 1e-12 * a.max_abs() / m.sigmas[0]);
    let curl = m.ops.curl(&u);
    let err: Vec<f64> = curl.data.iter().zip(&w.data).map(|(a, b)| a - b).collect();
    assert!(max_abs(&err) < 1e-8 * max_abs(&w.data));
}

#[test]
fn zero_vorticity_gives_zero_velocity() {
    let m = noisy();
    let u = m
        .velocity_from_vorticity(&ScalarField::zeros(&grid()))
        .unwrap();
    assert_eq!(u.max_abs(), 0.0);
}

#[test]
fn synthesized_vorticity_vanishes_on_the_rim() {
    let m = noisy();
    let n_theta = grid().n_theta();
    for seed in 0..10 {
        let c = random_coeffs(50 + seed, 16);
        let scale = c.iter().map(|v| v.abs()).sum::<f64>();
        for mode in m.basis.modes() {
            for j in 0..n_theta {
                let th = grid().angles()[j];
                assert!(mode.eval_polar(1.0, th).0.abs() < 1e-13);
            }
        }
        let rim: f64 = (0..n_theta)
            .map(|j| {
                let th = grid().angles()[j];
                m.basis
                    .modes()
                    .iter()
                    .zip(&c)
                    .map(|(b, ck)| ck * b.eval_polar(1.0, th).0)
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max);
        assert!(rim < 1e-9 * scale, "seed {seed}: {rim:e}");
    }
}

#[test]
fn advection_by_the_recovered_velocity_does_no_work() {
    let m = noisy();
    for seed in 0..20 {
        let c = random_coeffs(seed, 16);
        let n = m.nonlinear(&c);
        let rel = dot(&n, &c).abs() / (dot(&n, &n).sqrt() * dot(&c, &c).sqrt());
        assert!(rel < 1e-8, "seed {seed}: {rel:e}");
    }
}

#[test]
fn noise_transport_square_balances_its_energy() {
    let m = noisy();
    let g = grid();
    for seed in 0..5 {
        let w = m.basis.synthesize(&random_coeffs(200 + seed, 16)).unwrap();
        for xi in &noise().fields {
            let xv = xi.sample(&g);
            let lw = m.ops.advect_scalar(&xv, &w).unwrap();
            let llw = m.ops.advect_scalar(&xv, &lw).unwrap();
            let energy = g.integrate_product(&lw.data, &lw.data);
            let defect = g.integrate_product(&llw.data, &w.data) + energy;
            assert!(
                defect.abs() < 1e-7 * energy,
                "xi_{}: {:e}",
                xi.index,
                defect / energy
            );
        }
    }
}

#[test]
fn heat_decay_is_exact_with_the_integrating_factor() {
    let m = quiet();
    let cfg = SimConfig {
        nu: 0.3,
        dt: 0.01,
        t_end: 1.0,
        nonlinear: false,
        integrating_factor: true,
        ic: InitialCondition::Mode {
            index: 2,
            amplitude: 1.0,
        },
        ..SimConfig::default()
    };
    let out = run_vorticity_trajectory(m, &cfg).unwrap();
    let c0 = m.initial(&cfg.ic).unwrap();
    for (row, v) in out.rows.iter().zip(&out.velocity).step_by(10) {
        let decay = (-cfg.nu * m.sigmas[1].powi(2) * row.t).exp();
        let expect = c0[1] * decay;
        let got = m.vorticity_coeffs(v);
        assert!((got[1] - expect).abs() < 1e-12 * c0[1].abs());
        assert!(got.iter().enumerate().all(|(k, &x)| k == 1 || x == 0.0));
    }
}

#[test]
fn heat_decay_converges_at_second_order() {
    let m = quiet();
    let errs: Vec<f64> = [0.02, 0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| {
            let cfg = SimConfig {
                nu: 0.5,
                dt,
                nonlinear: false,
                ..SimConfig::default()
            };
            let out = run_vorticity_trajectory(m, &cfg).unwrap();
            let c0 = m.initial(&cfg.ic).unwrap();
            let exact = c0[0] * (-cfg.nu * m.sigmas[0].powi(2)).exp();
            (out.final_state.c[0] - exact).abs()
        })
        .collect();
    let p = observed_order(&errs);
    assert!((p - 2.0).abs() <= 0.3, "order {p} from {errs:?}");
}

#[test]
fn pure_transport_norm_defect_halves() {
    let m = noisy();
    let mut ratios = Vec::new();
    for seed in 0..3 {
        let cfg = SimConfig {
            nu: 0.0,
            nonlinear: false,
            ..SimConfig::default()
        };
        let c0 = m.initial(&cfg.ic).unwrap();
        let n0 = m.enstrophy(&c0).sqrt();
        // one noise field; the first is a rigid rotation near the origin and
        // leaves the radial initial mode fixed
        let coarse = sample_path(seed, 1000, 1e-3, 1);
        let mut defects = Vec::new();
        for level in 0..3 {
            let p1 = coarse.refined(level);
            let mut inc = vec![0.0; p1.n_steps * 8];
            for s in 0..p1.n_steps {
                inc[s * 8 + 1] = p1.increments[s];
            }
            let path = BrownianPath {
                increments: inc,
                m: 8,
                ..p1
            };
            let cfg = SimConfig {
                dt: path.dt,
                ..cfg.clone()
            };
            let out = run_vorticity(m, &cfg, c0.clone(), &path).unwrap();
            defects.push((m.enstrophy(&out.final_state.c).sqrt() - n0).abs());
        }
        for w in defects.windows(2) {
            ratios.push(w[0] / w[1]);
        }
    }
    println!("pure transport halving ratios {ratios:?}");
    assert!(ratios.iter().all(|r| (1.6..=2.4).contains(r)), "{ratios:?}");
}

#[test]
fn enstrophy_defect_halves_with_the_step() {
    let m = noisy();
    let cfg = SimConfig {
        nu: 0.1,
        ..SimConfig::default()
    };
    let c0 = m.initial(&cfg.ic).unwrap();
    let coarse = sample_path(2, 2500, 4e-4, 8);
    let defects: Vec<f64> = (0..4)
        .map(|level| {
            let path = coarse.refined(level);
            let cfg = SimConfig {
                dt: path.dt,
                ..cfg.clone()
            };
            run_vorticity(m, &cfg, c0.clone(), &path)
                .unwrap()
                .final_state
                .enstrophy_defect(m, cfg.nu)
                .abs()
        })
        .collect();
    for w in defects.windows(2) {
        assert!((1.6..=2.4).contains(&(w[0] / w[1])), "{defects:?}");
    }
}

#[test]
fn velocity_gradient_is_controlled_by_vorticity() {
    let m = noisy();
    let mut ratios = Vec::new();
    for seed in 0..100 {
        let c = random_coeffs(1000 + seed, 16);
        ratios.push(m.velocity_h1_sq(&c).sqrt() / m.enstrophy(&c).sqrt());
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("‖u‖₁ / ‖w‖ over 100 states: min {min:.4} max {max:.4}");
    assert!(max.is_finite() && min > 0.0);
    assert!(max / min < 10.0);
}

#[test]
fn both_formulations_agree_to_roundoff() {
    let m = noisy();
    let basis = Arc::new(BasisSet::build(2.0, 16, grid()).unwrap());
    let gal =
        GalerkinModel::new(basis, Arc::new(Operators::new(grid()).unwrap()), noise()).unwrap();
    let cfg = SimConfig {
        t_end: 0.2,
        seed: 5,
        ic: InitialCondition::Random {
            seed: 3,
            h1_norm: 2.0,
            bandwidth: 8,
        },
        ..SimConfig::default()
    };
    let path = sample_path(cfg.seed, cfg.n_steps(), cfg.dt, 8);
    let v0 = gal.initial(&cfg.ic).unwrap();
    let w0 = m.initial(&cfg.ic).unwrap();
    assert!(
        max_abs(
            &m.velocity_coeffs(&w0)
                .iter()
                .zip(&v0)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>()
        ) < 1e-12
    );
    let a = run_with_path(&gal, &cfg, v0, &path).unwrap();
    let b = run_vorticity(m, &cfg, w0, &path).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert!(
            (ra.l2_sq - rb.u_l2_sq).abs() < 1e-10 * ra.l2_sq,
            "t {}",
            ra.t
        );
    }
    let u_vort = b.velocity.last().unwrap();
    let diff: Vec<f64> = u_vort
        .iter()
        .zip(&a.final_state.c)
        .map(|(x, y)| x - y)
        .collect();
    assert!(
        dot(&diff, &diff).sqrt() < 1e-10,
        "{:e}",
        dot(&diff, &diff).sqrt()
    );
}

#[test]
fn sweep_of_a_repeated_viscosity_has_zero_difference() {
    let m = noisy();
    let cfg = SimConfig {
        t_end: 0.05,
        ..SimConfig::default()
    };
    let path = sample_path(1, cfg.n_steps(), cfg.dt, 8);
    let rep = viscosity_sweep(m, &cfg, &[0.1, 0.1, 0.05], &path).unwrap();
    assert_eq!(rep.entries.len(), 3);
    assert_eq!(rep.differences()[0], 0.0);
    assert!(rep.differences()[1] > 0.0);
    assert!(rep.entries[2].sup_l2_diff_to_next.is_none());

    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("nu,sup_l2_diff_to_next,sup_h1_norm,enstrophy_defect_T")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn sweep_rejects_bad_inputs() {
    let m = noisy();
    let cfg = SimConfig {
        t_end: 0.01,
        ..SimConfig::default()
    };
    let path = sample_path(1, cfg.n_steps(), cfg.dt, 8);
    assert!(viscosity_sweep(m, &cfg, &[], &path).is_err());
    assert!(viscosity_sweep(m, &cfg, &[0.05, 0.1], &path).is_err());
    let slip = SimConfig {
        alpha: 3.0,
        ..cfg.clone()
    };
    assert!(viscosity_sweep(m, &slip, &[0.1, 0.05], &path).is_err());
    assert!(run_vorticity_trajectory(m, &slip).is_err());
    let short = sample_path(1, cfg.n_steps(), cfg.dt, 3);
    assert!(viscosity_sweep(m, &cfg, &[0.1], &short).is_err());
}

#[test]
fn trajectory_csv_is_reproducible() {
    let cfg = SimConfig {
        t_end: 0.05,
        seed: 9,
        ..SimConfig::default()
    };
    let csv = || {
        let mut buf = Vec::new();
        run_vorticity_trajectory(noisy(), &cfg)
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        String::from_utf8(buf).unwrap()
    };
    let a = csv();
    assert_eq!(a, csv());
    assert!(a.starts_with("t,enstrophy,grad_sq,enstrophy_defect,u_l2_sq,u_h1_sq\n"));
    assert_eq!(a.lines().count(), cfg.n_steps() + 2);
}

#[test]
fn model_rejects_a_slip_velocity_basis() {
    let g = grid();
    let ops = Arc::new(Operators::new(g.clone()).unwrap());
    let basis = Arc::new(sdns_core::DirichletBasis::build(4, g.clone()).unwrap());
    let vb = Arc::new(BasisSet::build(3.0, 4, g).unwrap());
    assert!(VorticityModel::new(basis, vb, ops, &NoiseModel::none()).is_err());
}
