use std::path::Path;
use std::process::Command as Process;

use sdns_cli::manifest::config_hash;
use sdns_cli::{parse_config, run, Command, Form, RunConfig};
use sdns_core::find_sigmas;

fn config(dir: &Path, overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig {
        out_dir: dir.to_path_buf(),
        ..parse_config(None, &o).unwrap()
    }
}

fn rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn spectrum_matches_the_root_finder() {
    let tmp = tempfile::tempdir().unwrap();
    for alpha in ["2", "3.5"] {
        let cfg = config(
            tmp.path(),
            &[&format!("sim.alpha={alpha}"), "sim.n_modes=10"],
        );
        let out = run(Command::Spectrum, &cfg).unwrap();
        assert_eq!(out.outputs, ["config.toml", "spectrum.csv"]);
        let (header, rows) = rows(&tmp.path().join("spectrum.csv"));
        assert_eq!(header, "n,parity,k,sigma,lambda,harmonic_coeff,norm_const");
        assert_eq!(rows.len(), 10);
        let mut last = 0.0;
        for r in &rows {
            let (n, k, sigma, lambda) = (
                r[0].parse().unwrap(),
                r[2].parse::<usize>().unwrap(),
                num(&r[3]),
                num(&r[4]),
            );
            let expect = find_sigmas(n, cfg.sim.alpha, k).unwrap()[k - 1];
            assert!((sigma - expect).abs() < 1e-12 * expect, "{r:?}");
            assert!((lambda - sigma * sigma).abs() < 1e-12 * lambda);
            assert!(lambda >= last);
            last = lambda;
        }
    }
}

#[test]
fn noise_free_mode_decays_exponentially() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        &[
            "noise.modes=0",
            "sim.nu=0.2",
            "sim.t_end=0.5",
            "grid.n_r=48",
            "grid.n_theta=32",
        ],
    );
    let out = run(Command::Simulate, &cfg).unwrap();
    assert_eq!(
        out.outputs,
        ["config.toml", "trajectory.csv", "final_velocity.sdns"]
    );
    let lambda = find_sigmas(0, 2.0, 1).unwrap()[0].powi(2);
    let (header, rows) = rows(&tmp.path().join("trajectory.csv"));
    assert_eq!(header, "t,l2_sq,h1_sq,H_sq,energy_defect,hit_flag");
    assert_eq!(rows.len(), 501);
    for r in &rows {
        let (t, l2) = (num(&r[0]), num(&r[1]));
        let exact = (-2.0 * cfg.sim.nu * lambda * t).exp();
        // Heun at Δt = 1e-3: error ~ (νλΔt)² per unit time
        assert!((l2 - exact).abs() < 1e-6, "t = {t}: {l2} vs {exact}");
        assert_eq!(r[5], "0");
    }
}

#[test]
fn ensemble_outputs_summarize_the_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        &[
            "ensemble.paths=3",
            "sim.t_end=0.05",
            "sim.n_modes=6",
            "grid.n_r=48",
            "grid.n_theta=32",
        ],
    );
    run(Command::Simulate, &cfg).unwrap();
    let (header, paths) = rows(&tmp.path().join("ensemble.csv"));
    assert_eq!(header, "path,seed,stopped_energy");
    assert_eq!(paths.len(), 3);
    let (header, summary) = rows(&tmp.path().join("ensemble_summary.csv"));
    assert_eq!(header, "n_paths,mean,std_err,max,hits");
    let values: Vec<f64> = paths.iter().map(|r| num(&r[2])).collect();
    let mean = values.iter().sum::<f64>() / 3.0;
    assert!((num(&summary[0][1]) - mean).abs() < 1e-14);
    assert_eq!(
        num(&summary[0][3]),
        values.iter().cloned().fold(0.0, f64::max)
    );
}

#[test]
fn vorticity_form_and_sweep_need_the_free_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in [Command::Sweep, Command::Simulate] {
        let mut cfg = config(tmp.path(), &["sim.alpha=3"]);
        cfg.form = Form::Vorticity;
        let e = run(cmd, &cfg).unwrap_err();
        assert!(format!("{e:#}").starts_with("sim.alpha"), "{e:#}");
    }
    let mut cfg = config(
        tmp.path(),
        &[
            "sim.t_end=0.05",
            "sim.n_modes=6",
            "grid.n_r=48",
            "grid.n_theta=32",
        ],
    );
    cfg.form = Form::Vorticity;
    let out = run(Command::Simulate, &cfg).unwrap();
    assert_eq!(
        out.outputs,
        ["config.toml", "vorticity.csv", "final_vorticity.sdns"]
    );
}

#[test]
fn sweep_writes_one_row_per_viscosity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        &[
            "sim.t_end=0.1",
            "sim.n_modes=8",
            "grid.n_r=48",
            "grid.n_theta=32",
        ],
    );
    run(Command::Sweep, &cfg).unwrap();
    let (_, rows) = rows(&tmp.path().join("sweep.csv"));
    assert_eq!(rows.len(), cfg.nu_list.len());
    for (r, nu) in rows.iter().zip(&cfg.nu_list) {
        assert_eq!(num(&r[0]), *nu);
    }
}

fn sdns(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_sdns"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn binary_writes_a_manifest_matching_its_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let out_s = out.to_str().unwrap();
    let res = sdns(&[
        "simulate",
        "--out",
        out_s,
        "--seed",
        "11",
        "--set",
        "sim.t_end=0.02",
        "--set",
        "sim.n_modes=4",
        "--set",
        "grid.n_r=32",
        "--set",
        "grid.n_theta=16",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let manifest: toml::Table = std::fs::read_to_string(out.join("manifest.txt"))
        .unwrap()
        .parse()
        .unwrap();
    let config = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert_eq!(manifest["command"].as_str(), Some("simulate"));
    assert_eq!(manifest["seed"].as_str(), Some("11"));
    assert_eq!(
        manifest["config_sha256"].as_str(),
        Some(config_hash(&config).as_str())
    );
    assert!(manifest["wall_time_s"].as_float().unwrap() >= 0.0);
    assert_eq!(
        manifest["sdns_version"].as_str(),
        Some(env!("CARGO_PKG_VERSION"))
    );
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o.as_str() == Some("trajectory.csv")));

    // the written config reproduces the run
    let again = tmp.path().join("again");
    let res = sdns(&[
        "simulate",
        "--config",
        out.join("config.toml").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert_eq!(
        std::fs::read(out.join("trajectory.csv")).unwrap(),
        std::fs::read(again.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn binary_reports_bad_configuration_with_exit_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    for (args, key) in [
        (vec!["simulate", "--set", "sim.nu=-1"], "sim.nu"),
        (vec!["spectrum", "--set", "sim.bogus=1"], "sim.bogus"),
        (vec!["sweep", "--set", "sim.alpha=3"], "sim.alpha"),
    ] {
        let mut args = args;
        args.extend(["--out", out]);
        let res = sdns(&args);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&res.stderr);
        assert!(err.contains(key), "{args:?}: {err}");
    }
    assert!(!sdns(&["simulate", "--config", "/nonexistent.toml"])
        .status
        .success());
    assert!(!sdns(&["frobnicate"]).status.success());
}
