//! End-to-end acceptance suite. Run with
//! `cargo test --release -p sdns-cli --test acceptance`.

use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use sdns_cli::validate::{basis_checks, fd_eigen_check, operator_checks, trend_violations, Models};
use sdns_cli::{run, Command, RunConfig};
use sdns_core::oracle::{observed_order, order_checks};
use sdns_core::{
    ensemble, run_vorticity, run_with_path, sample_path, viscosity_sweep, BasisSet, BrownianPath,
    BumpParams, DiskGrid, GalerkinModel, InitialCondition, NoiseModel, Operators, Scheme,
    SimConfig, VorticityModel,
};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn grid() -> Arc<DiskGrid> {
    Arc::new(DiskGrid::new(96, 64).unwrap())
}

fn noise() -> NoiseModel {
    NoiseModel::build(8, 0.5, 1.5, BumpParams::default()).unwrap()
}

fn galerkin(alpha: f64, n: usize, noise: &NoiseModel) -> Result<GalerkinModel> {
    let g = grid();
    let basis = Arc::new(BasisSet::build(alpha, n, g.clone())?);
    Ok(GalerkinModel::new(
        basis,
        Arc::new(Operators::new(g)?),
        noise,
    )?)
}

fn basis_correctness() -> Result<Verdict> {
    let mut failed = Vec::new();
    let mut count = 0;
    for alpha in [2.0, 3.0, 5.0] {
        let m = galerkin(alpha, 16, &NoiseModel::none())?;
        let mut checks = basis_checks(&m.basis, &m.ops)?;
        checks.push(fd_eigen_check(alpha, 16)?);
        for c in checks {
            count += 1;
            if !c.passed() {
                failed.push(format!("α={alpha} {c}"));
            }
        }
    }
    Ok(verdict(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{count} checks over α ∈ {{2,3,5}}, N = 16")
        } else {
            failed.join("; ")
        },
    ))
}

fn operator_identities() -> Result<Verdict> {
    let cfg = RunConfig::default();
    let models = Models::new(&cfg)?;
    let xi = models.xi_jets();
    let m = models.galerkin(2.0, 16)?;
    let checks = operator_checks(&m.basis, &models.ops, &xi, 100, 0)?;
    let worst: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {:.1e}", c.name, c.measured))
        .collect();
    Ok(verdict(
        checks.iter().all(|c| c.passed()),
        format!("100 random fields each: {}", worst.join("; ")),
    ))
}

fn deterministic_dynamics() -> Result<Verdict> {
    let m = galerkin(2.0, 16, &NoiseModel::none())?;
    let decay = |scheme: Scheme, dt: f64| -> Result<f64> {
        let cfg = SimConfig {
            nu: 0.5,
            dt,
            scheme,
            nonlinear: false,
            ..SimConfig::default()
        };
        let out = run_with_path(
            &m,
            &cfg,
            m.initial(&cfg.ic)?,
            &BrownianPath::zeros(cfg.n_steps(), dt, 0),
        )?;
        Ok((out.final_state.c[0] - (-cfg.nu * m.lambdas()[0]).exp()).abs())
    };
    let dts = [0.02, 0.01, 0.005, 0.0025];
    let mut orders = Vec::new();
    let mut ok = true;
    for (scheme, designed) in [(Scheme::ItoEuler, 1.0), (Scheme::StratHeun, 2.0)] {
        let errs = dts
            .iter()
            .map(|&dt| decay(scheme, dt))
            .collect::<Result<Vec<_>>>()?;
        let p = observed_order(&errs);
        ok &= (p - designed).abs() <= 0.3;
        orders.push(format!("{scheme} {p:.3}"));
    }
    let defect = |dt: f64| -> Result<f64> {
        let cfg = SimConfig {
            dt,
            ic: InitialCondition::Random {
                seed: 4,
                h1_norm: 3.0,
                bandwidth: 8,
            },
            ..SimConfig::default()
        };
        let out = run_with_path(
            &m,
            &cfg,
            m.initial(&cfg.ic)?,
            &BrownianPath::zeros(cfg.n_steps(), dt, 0),
        )?;
        Ok(out.rows.last().unwrap().energy_defect.abs())
    };
    let d = [defect(4e-3)?, defect(2e-3)?, defect(1e-3)?];
    let ratios = [d[0] / d[1], d[1] / d[2]];
    ok &= ratios.iter().all(|r| *r >= 1.6);
    Ok(verdict(
        ok,
        format!(
            "decay orders {}; energy defect ratios {:.3} {:.3}",
            orders.join(", "),
            ratios[0],
            ratios[1]
        ),
    ))
}

fn enstrophy_identity() -> Result<Verdict> {
    let model = VorticityModel::build(16, grid(), &noise())?;
    let mut ratios = Vec::new();
    for nu in [0.1, 0.01] {
        let cfg = SimConfig {
            nu,
            ..SimConfig::default()
        };
        let c0 = model.initial(&cfg.ic)?;
        for seed in 0..5 {
            let coarse = sample_path(seed, 2500, 4e-4, model.n_noise());
            let defects = (0..4)
                .map(|level| {
                    let path = coarse.refined(level);
                    let cfg = SimConfig {
                        dt: path.dt,
                        ..cfg.clone()
                    };
                    let out = run_vorticity(&model, &cfg, c0.clone(), &path)?;
                    Ok(out.final_state.enstrophy_defect(&model, nu).abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            ratios.extend(defects.windows(2).map(|w| w[0] / w[1]));
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(verdict(
        (1.6..=2.4).contains(&lo) && (1.6..=2.4).contains(&hi),
        format!("{} halving ratios in [{lo:.3}, {hi:.3}]", ratios.len()),
    ))
}

fn ito_stratonovich() -> Result<Verdict> {
    let model = galerkin(2.0, 16, &noise())?;
    let (dt0, levels, paths) = (4e-3, 6u32, 128u64);
    let cfg = SimConfig {
        hitting_m: 1e9,
        ..SimConfig::default()
    };
    let c0 = model.initial(&cfg.ic)?;
    let mut mean_sq = vec![0.0; levels as usize];
    for seed in 0..paths {
        let base = sample_path(
            seed,
            (cfg.t_end / dt0).round() as usize,
            dt0,
            model.n_noise(),
        );
        for level in 0..levels {
            let path = base.refined(level);
            let run = |scheme| {
                let c = SimConfig {
                    dt: path.dt,
                    scheme,
                    ..cfg.clone()
                };
                run_with_path(&model, &c, c0.clone(), &path).map(|o| o.final_state.c)
            };
            let (a, b) = (run(Scheme::ItoEuler)?, run(Scheme::StratHeun)?);
            let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
            mean_sq[level as usize] += d / paths as f64;
        }
    }
    let rms: Vec<f64> = mean_sq.iter().map(|v| v.sqrt()).collect();
    let p = observed_order(&rms);
    Ok(verdict(
        p >= 0.5,
        format!(
            "RMS difference {:?}, observed order {p:.3}",
            rms.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    ))
}

fn viscosity_sweep_criteria() -> Result<(Verdict, Verdict)> {
    let model = VorticityModel::build(16, grid(), &noise())?;
    let cfg = SimConfig::default();
    let path = sample_path(cfg.seed, cfg.n_steps(), cfg.dt, model.n_noise());
    let report = viscosity_sweep(&model, &cfg, &[0.1, 0.05, 0.025, 0.0125], &path)?;
    let spread = report.h1_spread();
    let diffs = report.differences();
    let bad = trend_violations(&diffs);
    Ok((
        verdict(spread < 0.05, format!("sup_t ‖u‖₁ spread {spread:.3e}")),
        verdict(
            bad == 0,
            format!(
                "sup_t L² differences {:?}, {bad} violations",
                diffs.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>()
            ),
        ),
    ))
}

fn galerkin_stability() -> Result<Verdict> {
    let noise = noise();
    let mut stats = Vec::new();
    for n in [8, 16, 32] {
        let model = galerkin(2.0, n, &noise)?;
        let cfg = SimConfig {
            n_modes: n,
            ..SimConfig::default()
        };
        let s = ensemble(&model, &cfg, 64)?;
        stats.push((n, s.mean, s.std_err));
    }
    let growth: Vec<f64> = stats
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / w[0].2.hypot(w[1].2))
        .collect();
    Ok(verdict(
        growth.iter().all(|g| *g <= 2.0),
        format!(
            "means {}; growth in standard errors {:?}",
            stats
                .iter()
                .map(|(n, m, se)| format!("N={n} {m:.5}±{se:.1e}"))
                .collect::<Vec<_>>()
                .join(", "),
            growth.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>()
        ),
    ))
}

fn oracle_integrity() -> Result<Verdict> {
    let checks = order_checks()?;
    let ok = checks
        .iter()
        .all(|c| (c.observed - c.designed).abs() <= 0.3);
    Ok(verdict(
        ok,
        checks
            .iter()
            .map(|c| format!("{} {:.2} (designed {})", c.name, c.observed, c.designed))
            .collect::<Vec<_>>()
            .join(", "),
    ))
}

fn outputs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        // the manifest records wall-clock time
        if name != "manifest.txt" {
            files.push((name, std::fs::read(entry.path())?));
        }
    }
    files.sort();
    Ok(files)
}

fn reproducibility() -> Result<Verdict> {
    let tmp = tempfile::tempdir()?;
    let mut detail = Vec::new();
    let mut ok = true;
    for cmd in [Command::Validate, Command::Simulate] {
        let mut runs = Vec::new();
        for k in 0..2 {
            let cfg = RunConfig {
                paths: 4,
                out_dir: tmp.path().join(format!("{}-{k}", cmd.name())),
                ..RunConfig::default()
            };
            run(cmd, &cfg)?;
            runs.push(outputs(&cfg.out_dir)?);
        }
        let same = runs[0] == runs[1];
        ok &= same && !runs[0].is_empty();
        detail.push(format!(
            "{} {} files {}",
            cmd.name(),
            runs[0].len(),
            if same { "identical" } else { "differ" }
        ));
    }
    Ok(verdict(ok, detail.join(", ")))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |label: &str, v: Result<Verdict>, secs: f64| {
        let v = v.unwrap_or_else(|e| verdict(false, format!("error: {e:#}")));
        all &= v.passed;
        println!(
            "{}  {label} ({secs:.1} s): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    };
    let timed = |f: &dyn Fn() -> Result<Verdict>| {
        let t = Instant::now();
        let v = f();
        (v, t.elapsed().as_secs_f64())
    };

    let (v, s) = timed(&basis_correctness);
    report("1 basis correctness", v, s);
    let (v, s) = timed(&operator_identities);
    report("2 operator identities", v, s);
    let (v, s) = timed(&deterministic_dynamics);
    report("3 deterministic dynamics", v, s);
    let (v, s) = timed(&enstrophy_identity);
    report("4 pathwise enstrophy identity", v, s);
    let (v, s) = timed(&ito_stratonovich);
    report("5 Itô/Stratonovich consistency", v, s);
    let t = Instant::now();
    let (six, seven) = match viscosity_sweep_criteria() {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(anyhow::anyhow!("{e:#}")), Err(e)),
    };
    let s = t.elapsed().as_secs_f64();
    report("6 uniform-in-viscosity bound", six, s);
    report("7 inviscid-limit trend", seven, s);
    let (v, s) = timed(&galerkin_stability);
    report("8 Galerkin stability uniformity", v, s);
    let (v, s) = timed(&oracle_integrity);
    report("9 oracle integrity", v, s);
    let (v, s) = timed(&reproducibility);
    report("10 reproducibility", v, s);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
