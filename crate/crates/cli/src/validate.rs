//! The invariant suite behind `sdns validate`.
//!
//! Every check records the measured defect next to its bound, so the report
//! doubles as a record of how close each identity comes to failing.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use anyhow::Result;
use sdns_core::noise::trajectory_seed;
use sdns_core::oracle::{fd_stokes_eigs, order_checks};
use sdns_core::{
    ensemble, run_vorticity, run_with_path, sample_path, viscosity_sweep, BasisSet, BrownianPath,
    DiskGrid, GalerkinModel, InitialCondition, NoiseModel, Operators, ScalarField, Scheme,
    SimConfig, VectorField, VectorJet, VorticityModel,
};

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    /// `measured < limit`.
    Below(f64),
    /// `lo ≤ measured ≤ hi`.
    Range(f64, f64),
    /// Finite and positive; the value itself is reported, not judged.
    Finite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        let m = self.measured;
        match self.bound {
            Bound::Below(limit) => m < limit,
            Bound::Range(lo, hi) => (lo..=hi).contains(&m),
            Bound::Finite => m.is_finite() && m > 0.0,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = match self.bound {
            Bound::Below(l) => format!("< {l:.1e}"),
            Bound::Range(lo, hi) => format!("in [{lo}, {hi}]"),
            Bound::Finite => "finite".to_string(),
        };
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict}  {:<44} {:>14.6e}  {bound}",
            self.name, self.measured
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for c in &self.checks {
            writeln!(w, "{c}")?;
        }
        let failed = self.failures().count();
        writeln!(
            w,
            "{} checks, {} passed, {} failed",
            self.checks.len(),
            self.checks.len() - failed,
            failed
        )
    }
}

/// Standard normal coefficients drawn from the path generator.
pub fn gaussian(seed: u64, n: usize) -> Vec<f64> {
    sample_path(seed, 1, 1.0, n).increments
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm(ops: &Operators, f: &VectorField) -> f64 {
    ops.inner_l2(f, f).sqrt()
}

fn scalar_norm(ops: &Operators, s: &[f64]) -> f64 {
    ops.grid().integrate_product(s, s).sqrt()
}

fn h1(ops: &Operators, f: &VectorField) -> f64 {
    ops.inner_h1(f, f).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient of `β(r²/0.81)·x²y`, compactly supported inside the disk.
fn bump_gradient(grid: &DiskGrid) -> VectorField {
    VectorField::from_fn(grid, |x, y| {
        let s = (x * x + y * y) / 0.81;
        if s >= 1.0 {
            return [0.0, 0.0];
        }
        let e = (-1.0 / (1.0 - s)).exp();
        let de = -e / ((1.0 - s) * (1.0 - s)) / 0.81;
        let g = x * x * y;
        [
            2.0 * x * y * e + g * de * 2.0 * x,
            x * x * e + g * de * 2.0 * y,
        ]
    })
}

/// Orthonormality, the eigen-relation, the slip condition, the `H` Gram and
/// orthogonality to gradients.
pub fn basis_checks(basis: &BasisSet, ops: &Operators) -> Result<Vec<Check>> {
    let alpha = basis.alpha();
    let tag = |s: &str| format!("basis[alpha={alpha}].{s}");
    let n = basis.len();
    let lambdas = basis.lambdas();
    let (mut gram, mut hgram, mut eig, mut slip, mut normal) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in 0..n {
        let aj = basis.sample(j);
        for k in 0..n {
            let ak = basis.sample(k);
            let e = if j == k { 1.0 } else { 0.0 };
            gram = gram.max((ops.inner_l2(aj, ak) - e).abs());
            hgram = hgram.max((ops.inner_h(aj, ak, alpha) - e * lambdas[k]).abs() / lambdas[k]);
        }
        let mut r = ops.stokes_apply(aj)?;
        r.axpy(-lambdas[j], aj);
        eig = eig.max(norm(ops, &r) / lambdas[j]);
        let trace = ops.boundary_trace(aj);
        let curl = ops.curl(aj).data;
        let rim = ops.grid().rim_values(&curl);
        let scale = max_abs(&curl);
        for (w, t) in rim.iter().zip(&trace.tangential) {
            slip = slip.max((w - (2.0 - alpha) * t).abs() / scale);
        }
        normal = normal.max(max_abs(&trace.normal));
    }
    let grad = basis.analyze(&bump_gradient(ops.grid()))?;
    Ok(vec![
        Check::new(tag("min_eigenvalue"), lambdas[0], Bound::Finite),
        Check::new(tag("gram_deviation"), gram, Bound::Below(1e-8)),
        Check::new(tag("eigen_relation"), eig, Bound::Below(1e-6)),
        Check::new(tag("slip_residual"), slip, Bound::Below(1e-8)),
        Check::new(tag("normal_trace"), normal, Bound::Below(1e-8)),
        Check::new(tag("h_gram_deviation"), hgram, Bound::Below(1e-6)),
        Check::new(
            tag("gradient_coefficients"),
            max_abs(&grad),
            Bound::Below(1e-8),
        ),
    ])
}

/// Eigenvalues against the finite-difference streamfunction solve at
/// `n_r = 512`.
pub fn fd_eigen_check(alpha: f64, n_modes: usize) -> Result<Check> {
    let table = sdns_core::stokes_spectrum(alpha, n_modes)?;
    let max_n = table.modes.iter().map(|m| m.n).max().unwrap_or(0);
    let mut worst = 0.0f64;
    for n in 0..=max_n {
        let ks: Vec<_> = table.modes.iter().filter(|m| m.n == n).collect();
        let kmax = ks.iter().map(|m| m.k).max().unwrap_or(0) as usize;
        if kmax == 0 {
            continue;
        }
        let fd = fd_stokes_eigs(alpha, n, 512, kmax)?;
        for m in ks {
            let rel = match fd.get(m.k as usize - 1) {
                Some(l) => (l - m.lambda).abs() / m.lambda,
                None => f64::INFINITY,
            };
            worst = worst.max(rel);
        }
    }
    Ok(Check::new(
        format!("basis[alpha={alpha}].fd_eigenvalues"),
        worst,
        Bound::Below(1e-3),
    ))
}

/// Exact calculus identities on a grid sized to the test function; radial
/// differentiation roundoff grows like `n_r⁴`.
pub fn calculus_checks() -> Result<Vec<Check>> {
    let ops = Operators::new(Arc::new(DiskGrid::new(24, 32)?))?;
    let g = ops
        .grid()
        .sample(|r, t| (r * t.cos()).sin() * (0.5 * r * t.sin()).exp());
    let [gx, gy] = ops.gradient(&g);
    let grad = VectorField::from_parts(ops.grid(), gx, gy);
    let curl = max_abs(&ops.curl(&grad).data);
    let proj = norm(&ops, &ops.leray_project(&grad)?) / norm(&ops, &grad);
    Ok(vec![
        Check::new("calculus.curl_of_gradient", curl, Bound::Below(1e-9)),
        Check::new("leray.kills_gradients", proj, Bound::Below(1e-7)),
    ])
}

/// Projection, Green, transport and SALT identities on `samples` random
/// fields from the span of `basis`.
pub fn operator_checks(
    basis: &BasisSet,
    ops: &Operators,
    xi: &[VectorJet],
    samples: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let alpha = basis.alpha();
    let n = basis.len();
    let tag = |s: &str| format!("ops[alpha={alpha}].{s}");
    let draw = |k: usize| -> Result<VectorField> {
        Ok(basis.synthesize(&gaussian(trajectory_seed(seed, k), n))?)
    };
    let mut worst = [0.0f64; 7];
    for s in 0..samples {
        let base = 8 * s;
        // a span field plus the gradient of a random cubic
        let mut f = draw(base)?;
        let p = gaussian(trajectory_seed(seed, base + 1), 6);
        let g = ops.grid().sample(|r, t| {
            let (x, y) = (r * t.cos(), r * t.sin());
            p[0] * x + p[1] * y + p[2] * x * y + p[3] * x * x + p[4] * y * y * y + p[5] * x * x * y
        });
        let [gx, gy] = ops.gradient(&g);
        f.axpy(1.0, &VectorField::from_parts(ops.grid(), gx, gy));
        let pf = ops.leray_project(&f)?;
        let ppf = ops.leray_project(&pf)?;
        worst[0] = worst[0].max(norm(ops, &ppf.sub(&pf)) / norm(ops, &pf));
        worst[1] = worst[1].max(ops.inner_l2(&pf, &f.sub(&pf)).abs() / ops.inner_l2(&f, &f));
        let cf = ops.curl(&f).data;
        let cpf = ops.curl(&pf).data;
        let d: Vec<f64> = cpf.iter().zip(&cf).map(|(a, b)| a - b).collect();
        worst[2] = worst[2].max(scalar_norm(ops, &d) / scalar_norm(ops, &cf));

        let (u, v, w) = (draw(base + 2)?, draw(base + 3)?, draw(base + 4)?);
        worst[3] = worst[3].max(ops.greens_defect(&u, &v, alpha) / (h1(ops, &u) * h1(ops, &v)));
        worst[4] = worst[4].max(
            ops.nonlinear_antisymmetry_defect(&u, &v, &w)?
                / (h1(ops, &u) * h1(ops, &v) * h1(ops, &w)),
        );
        if !xi.is_empty() {
            let x = &xi[s % xi.len()];
            let rhs = ops.advect_scalar(&x.value, &ops.curl(&u))?;
            worst[5] = worst[5].max(ops.curl_commute_defect(x, &u)? / scalar_norm(ops, &rhs.data));
            let bu = ops.salt_b(x, &u)?;
            let direct = ops.leray_project(&ops.salt_b(x, &bu)?)?;
            let twice = ops.leray_project(&ops.salt_b(x, &ops.leray_project(&bu)?)?)?;
            worst[6] = worst[6].max(norm(ops, &direct.sub(&twice)) / norm(ops, &direct));
        }
    }
    let mut checks = vec![
        Check::new(tag("leray_idempotence"), worst[0], Bound::Below(1e-9)),
        Check::new(tag("leray_orthogonality"), worst[1], Bound::Below(1e-8)),
        Check::new(tag("leray_preserves_curl"), worst[2], Bound::Below(1e-7)),
        Check::new(tag("greens_defect"), worst[3], Bound::Below(1e-6)),
        Check::new(tag("trilinear_antisymmetry"), worst[4], Bound::Below(1e-7)),
    ];
    if !xi.is_empty() {
        checks.push(Check::new(
            tag("salt_curl_commutation"),
            worst[5],
            Bound::Below(1e-5),
        ));
        checks.push(Check::new(
            tag("projected_salt_square"),
            worst[6],
            Bound::Below(1e-5),
        ));
    }

    // single-mode instances
    if n >= 2 {
        let (a1, a2) = (basis.sample(0), basis.sample(1));
        let lambda1 = basis.lambdas()[0];
        checks.push(Check::new(
            tag("greens_first_mode"),
            ops.greens_defect(a1, a1, alpha) / lambda1,
            Bound::Below(1e-7),
        ));
        let tri = ops.inner_l2(&ops.advect(a1, a2)?, a2).abs();
        checks.push(Check::new(
            tag("transport_cancellation"),
            tri / (h1(ops, a1) * h1(ops, a2).powi(2)),
            Bound::Below(1e-8),
        ));
    }
    Ok(checks)
}

fn single_mode_error(model: &GalerkinModel, dt: f64) -> Result<f64> {
    let cfg = SimConfig {
        nu: 0.5,
        dt,
        t_end: 1.0,
        nonlinear: false,
        scheme: Scheme::StratHeun,
        n_modes: model.n_modes(),
        ..SimConfig::default()
    };
    // Heun carries no corrector, so a silent path gives the deterministic run
    let path = BrownianPath::zeros(cfg.n_steps(), dt, model.n_noise());
    let out = run_with_path(model, &cfg, model.initial(&cfg.ic)?, &path)?;
    let exact = (-cfg.nu * model.lambdas()[0]).exp();
    Ok((out.final_state.c[0] - exact).abs())
}

/// Energy cancellation, deterministic convergence and ensemble stability of
/// the velocity system.
pub fn galerkin_checks(
    cfg: &RunConfig,
    model: &GalerkinModel,
    coarse: &GalerkinModel,
) -> Result<Vec<Check>> {
    let n = model.n_modes();
    let mut cancel = 0.0f64;
    for k in 0..20 {
        let c = gaussian(trajectory_seed(cfg.sim.seed, 500 + k), n);
        let q = model.nonlinear(&c);
        let denom = dot(&q, &q).sqrt() * dot(&c, &c).sqrt();
        if denom > 0.0 {
            cancel = cancel.max(dot(&q, &c).abs() / denom);
        }
    }
    let errs = [0.02, 0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| single_mode_error(model, dt))
        .collect::<Result<Vec<_>>>()?;
    let order = sdns_core::oracle::observed_order(&errs);

    let defect = |dt: f64| -> Result<f64> {
        let c = SimConfig {
            dt,
            scheme: Scheme::StratHeun,
            n_modes: n,
            ic: InitialCondition::Random {
                seed: 4,
                h1_norm: 3.0,
                bandwidth: n.min(8),
            },
            ..SimConfig::default()
        };
        let path = BrownianPath::zeros(c.n_steps(), dt, model.n_noise());
        let out = run_with_path(model, &c, model.initial(&c.ic)?, &path)?;
        Ok(out
            .rows
            .last()
            .map(|r| r.energy_defect.abs())
            .unwrap_or(0.0))
    };
    let d = [defect(4e-3)?, defect(2e-3)?, defect(1e-3)?];
    let halving = (d[0] / d[1]).min(d[1] / d[2]);

    let ens_cfg = |m: &GalerkinModel| SimConfig {
        n_modes: m.n_modes(),
        ic: InitialCondition::Mode {
            index: 1,
            amplitude: 1.0,
        },
        ..cfg.sim.clone()
    };
    let small = ensemble(coarse, &ens_cfg(coarse), 16)?;
    let large = ensemble(model, &ens_cfg(model), 16)?;
    let se = small.std_err.hypot(large.std_err);
    let growth = (large.mean - small.mean) / se.max(f64::MIN_POSITIVE);

    Ok(vec![
        Check::new("galerkin.energy_cancellation", cancel, Bound::Below(1e-8)),
        Check::new("galerkin.heun_decay_order", order, Bound::Range(1.7, 2.3)),
        Check::new(
            "galerkin.energy_defect_halving",
            halving,
            Bound::Range(1.6, f64::INFINITY),
        ),
        Check::new(
            format!(
                "galerkin.stability_growth_{}_to_{}_in_se",
                coarse.n_modes(),
                n
            ),
            growth,
            Bound::Range(f64::NEG_INFINITY, 2.0),
        ),
    ])
}

/// Biot–Savart recovery, transport cancellation, the enstrophy ledger and
/// the viscosity sweep.
pub fn vorticity_checks(
    cfg: &RunConfig,
    model: &VorticityModel,
    xi: &[VectorJet],
) -> Result<Vec<Check>> {
    let n = model.n_modes();
    let seed = cfg.sim.seed;
    let grid = model.basis.grid().clone();
    let ops = &model.ops;
    let (mut curl_err, mut rim, mut cancel, mut square) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut ratio = (f64::INFINITY, 0.0f64);
    for k in 0..100 {
        let c = gaussian(trajectory_seed(seed, 700 + k), n);
        ratio.0 = ratio
            .0
            .min(model.velocity_h1_sq(&c).sqrt() / model.enstrophy(&c).sqrt());
        ratio.1 = ratio
            .1
            .max(model.velocity_h1_sq(&c).sqrt() / model.enstrophy(&c).sqrt());
        if k >= 10 {
            continue;
        }
        let w = model.basis.synthesize(&c)?;
        let u = model.velocity_from_vorticity(&w)?;
        let cu = ops.curl(&u).data;
        let d: Vec<f64> = cu.iter().zip(&w.data).map(|(a, b)| a - b).collect();
        curl_err = curl_err.max(max_abs(&d) / max_abs(&w.data));
        let scale: f64 = c.iter().map(|v| v.abs()).sum();
        for &t in grid.angles() {
            let v: f64 = model
                .basis
                .modes()
                .iter()
                .zip(&c)
                .map(|(b, ck)| ck * b.eval_polar(1.0, t).0)
                .sum();
            rim = rim.max(v.abs() / scale);
        }
        let q = model.nonlinear(&c);
        let denom = dot(&q, &q).sqrt() * dot(&c, &c).sqrt();
        if denom > 0.0 {
            cancel = cancel.max(dot(&q, &c).abs() / denom);
        }
        for x in xi {
            let lw = ops.advect_scalar(&x.value, &w)?;
            let llw = ops.advect_scalar(&x.value, &lw)?;
            let energy = grid.integrate_product(&lw.data, &lw.data);
            if energy > 0.0 {
                let defect = grid.integrate_product(&llw.data, &w.data) + energy;
                square = square.max(defect.abs() / energy);
            }
        }
    }
    let zero = model
        .velocity_from_vorticity(&ScalarField::zeros(&grid))?
        .max_abs();

    let mut checks = vec![
        Check::new("vorticity.biot_savart_curl", curl_err, Bound::Below(1e-8)),
        Check::new("vorticity.rim_trace", rim, Bound::Below(1e-9)),
        Check::new(
            "vorticity.zero_gives_rest",
            zero,
            Bound::Below(f64::MIN_POSITIVE),
        ),
        Check::new(
            "vorticity.transport_cancellation",
            cancel,
            Bound::Below(1e-8),
        ),
        Check::new("vorticity.noise_square_balance", square, Bound::Below(1e-7)),
        Check::new(
            "vorticity.max_gradient_control_ratio",
            ratio.1,
            Bound::Finite,
        ),
        Check::new(
            "vorticity.min_gradient_control_ratio",
            ratio.0,
            Bound::Finite,
        ),
    ];

    let base = SimConfig {
        alpha: 2.0,
        n_modes: n,
        ..cfg.sim.clone()
    };
    if model.n_noise() > 0 {
        let c0 = model.initial(&SimConfig::default().ic)?;
        let ratios = |nu: f64, nonlinear: bool, paths: &[BrownianPath]| -> Result<Vec<f64>> {
            let n0 = model.enstrophy(&c0);
            let mut d = Vec::new();
            for p in paths {
                let c = SimConfig {
                    nu,
                    dt: p.dt,
                    nonlinear,
                    scheme: Scheme::StratHeun,
                    ..base.clone()
                };
                let out = run_vorticity(model, &c, c0.clone(), p)?;
                d.push(if nu == 0.0 {
                    (model.enstrophy(&out.final_state.c).sqrt() - n0.sqrt()).abs()
                } else {
                    out.final_state.enstrophy_defect(model, nu).abs()
                });
            }
            Ok(d.windows(2).map(|w| w[0] / w[1]).collect())
        };
        let farthest = |r: &[f64]| {
            r.iter().cloned().fold(2.0, |m: f64, v| {
                if (v - 2.0).abs() > (m - 2.0).abs() {
                    v
                } else {
                    m
                }
            })
        };
        // A single field, the second: the first only rotates radial modes.
        // The one-dimensional path is refined before it is embedded, so the
        // silent fields stay silent.
        let m_noise = model.n_noise();
        let one = m_noise.min(2) - 1;
        let single = sample_path(seed, 1000, 1e-3, 1);
        let embedded: Vec<BrownianPath> = (0..4)
            .map(|level| {
                let p = single.refined(level);
                let mut inc = vec![0.0; p.n_steps * m_noise];
                for s in 0..p.n_steps {
                    inc[s * m_noise + one] = p.increments[s];
                }
                BrownianPath {
                    increments: inc,
                    m: m_noise,
                    ..p
                }
            })
            .collect();
        let pure = ratios(0.0, false, &embedded)?;
        checks.push(Check::new(
            "vorticity.pure_transport_halving",
            farthest(&pure),
            Bound::Range(1.6, 2.4),
        ));
        let coarse = sample_path(seed, 2500, 4e-4, m_noise);
        let levels: Vec<BrownianPath> = (0..4).map(|l| coarse.refined(l)).collect();
        let full = ratios(0.1, true, &levels)?;
        checks.push(Check::new(
            "vorticity.enstrophy_defect_halving",
            farthest(&full),
            Bound::Range(1.6, 2.4),
        ));
    }

    let path = sample_path(seed, base.n_steps(), base.dt, model.n_noise());
    let sweep = viscosity_sweep(model, &base, &cfg.nu_list, &path)?;
    checks.push(Check::new(
        "sweep.h1_spread",
        sweep.h1_spread(),
        Bound::Below(0.05),
    ));
    checks.push(Check::new(
        "sweep.trend_violations",
        trend_violations(&sweep.differences()) as f64,
        Bound::Below(0.5),
    ));
    Ok(checks)
}

/// Counts breaks in the decrease of `diffs`: one rise of at most 10% is
/// tolerated, anything else counts.
pub fn trend_violations(diffs: &[f64]) -> usize {
    let mut inversions = 0;
    let mut bad = 0;
    for w in diffs.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            if w[1] > 1.1 * w[0] || inversions > 1 {
                bad += 1;
            }
        }
    }
    bad
}

/// Observed orders of the finite-difference oracles.
pub fn oracle_checks() -> Result<Vec<Check>> {
    Ok(order_checks()?
        .into_iter()
        .map(|c| {
            Check::new(
                format!("oracle.{}.order", c.name),
                c.observed,
                Bound::Range(c.designed - 0.3, c.designed + 0.3),
            )
        })
        .collect())
}

fn noise_model(cfg: &RunConfig) -> Result<NoiseModel> {
    Ok(if cfg.noise.modes == 0 {
        NoiseModel::none()
    } else {
        NoiseModel::build(
            cfg.noise.modes,
            cfg.noise.decay_rate,
            cfg.noise.amplitude,
            cfg.noise.bump,
        )?
    })
}

/// Shared setup for every command.
pub struct Models {
    pub grid: Arc<DiskGrid>,
    pub ops: Arc<Operators>,
    pub noise: NoiseModel,
}

impl Models {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let grid = Arc::new(DiskGrid::new(cfg.n_r, cfg.n_theta)?);
        Ok(Self {
            ops: Arc::new(Operators::new(grid.clone())?),
            grid,
            noise: noise_model(cfg)?,
        })
    }

    pub fn galerkin(&self, alpha: f64, n_modes: usize) -> Result<GalerkinModel> {
        let basis = Arc::new(BasisSet::build(alpha, n_modes, self.grid.clone())?);
        Ok(GalerkinModel::new(basis, self.ops.clone(), &self.noise)?)
    }

    pub fn vorticity(&self, n_modes: usize) -> Result<VorticityModel> {
        Ok(VorticityModel::build(
            n_modes,
            self.grid.clone(),
            &self.noise,
        )?)
    }

    pub fn xi_jets(&self) -> Vec<VectorJet> {
        self.noise
            .fields
            .iter()
            .map(|f| f.jet(&self.grid))
            .collect()
    }
}

/// The full suite for `cfg`.
pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    let m = Models::new(cfg)?;
    let xi = m.xi_jets();
    let n = cfg.sim.n_modes;
    let mut checks = Vec::new();

    let model = m.galerkin(cfg.sim.alpha, n)?;
    log::info!("basis and operator identities");
    checks.extend(basis_checks(&model.basis, &m.ops)?);
    checks.extend(calculus_checks()?);
    checks.extend(operator_checks(
        &model.basis,
        &m.ops,
        &xi,
        20,
        cfg.sim.seed,
    )?);

    let summ = m.noise.summability();
    if let Some(total) = summ.partial_sums.last() {
        checks.push(Check::new("noise.summability_total", *total, Bound::Finite));
    }

    log::info!("velocity dynamics");
    let coarse = m.galerkin(cfg.sim.alpha, (n / 2).max(1))?;
    checks.extend(galerkin_checks(cfg, &model, &coarse)?);

    log::info!("vorticity dynamics");
    let vort = m.vorticity(n)?;
    checks.extend(vorticity_checks(cfg, &vort, &xi)?);

    log::info!("oracle orders");
    checks.extend(oracle_checks()?);
    Ok(Report { checks })
}
