//! The four subcommands. Each writes its outputs, the resolved
//! configuration and a manifest into the output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Instant, SystemTime};

use anyhow::{bail, Context, Result};
use sdns_core::basis::write_spectrum_csv;
use sdns_core::noise::trajectory_seed;
use sdns_core::{
    ensemble, run_trajectory, run_vorticity_trajectory, sample_path, stokes_spectrum,
    viscosity_sweep,
};

use crate::config::{Form, RunConfig};
use crate::manifest::{config_hash, Manifest};
use crate::validate::{run_suite, Models, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Validate,
    Simulate,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Validate => "validate",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    /// File names written into the output directory, manifest excluded.
    pub outputs: Vec<String>,
    /// False when `validate` found a failing check.
    pub passed: bool,
    pub report: Option<Report>,
}

fn create(dir: &Path, name: &str, outputs: &mut Vec<String>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    outputs.push(name.to_string());
    Ok(BufWriter::new(file))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Runs `cmd` and writes everything under `cfg.out_dir`.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let canonical = cfg.canonical();
    let mut outputs = Vec::new();
    let mut w = create(dir, "config.toml", &mut outputs)?;
    w.write_all(canonical.as_bytes())?;
    finish(w)?;

    let (passed, report) = match cmd {
        Command::Spectrum => (spectrum(cfg, &mut outputs)?, None),
        Command::Simulate => (simulate(cfg, &mut outputs)?, None),
        Command::Sweep => (sweep(cfg, &mut outputs)?, None),
        Command::Validate => {
            let report = run_suite(cfg)?;
            let mut w = create(dir, "validate.txt", &mut outputs)?;
            report.write(&mut w)?;
            finish(w)?;
            (report.passed(), Some(report))
        }
    };

    Manifest {
        command: cmd.name().to_string(),
        config_sha256: config_hash(&canonical),
        seed: cfg.sim.seed,
        started,
        wall_time: clock.elapsed(),
        outputs: outputs.clone(),
        passed,
    }
    .save(dir)?;
    Ok(Outcome {
        outputs,
        passed,
        report,
    })
}

fn spectrum(cfg: &RunConfig, outputs: &mut Vec<String>) -> Result<bool> {
    let table = stokes_spectrum(cfg.sim.alpha, cfg.sim.n_modes)?;
    let mut w = create(&cfg.out_dir, "spectrum.csv", outputs)?;
    write_spectrum_csv(&mut w, &table.modes)?;
    finish(w)?;
    Ok(true)
}

fn simulate(cfg: &RunConfig, outputs: &mut Vec<String>) -> Result<bool> {
    let m = Models::new(cfg)?;
    let sim = &cfg.sim;
    let dir = &cfg.out_dir;
    match cfg.form {
        Form::Velocity => {
            let model = m.galerkin(sim.alpha, sim.n_modes)?;
            let out = run_trajectory(&model, sim)?;
            let mut w = create(dir, "trajectory.csv", outputs)?;
            out.write_csv(&mut w)?;
            finish(w)?;
            let u = model.basis.synthesize(&out.final_state.c)?;
            let mut w = create(dir, "final_velocity.sdns", outputs)?;
            u.write_snapshot(&mut w)?;
            finish(w)?;
            if let Some(t) = out.hit_time {
                log::warn!("hitting threshold reached at t = {t}");
            }
            if cfg.paths > 1 {
                let summary = ensemble(&model, sim, cfg.paths)?;
                let mut w = create(dir, "ensemble.csv", outputs)?;
                writeln!(w, "path,seed,stopped_energy")?;
                for (p, v) in summary.values.iter().enumerate() {
                    writeln!(w, "{p},{},{v:.16e}", trajectory_seed(sim.seed, p))?;
                }
                finish(w)?;
                let mut w = create(dir, "ensemble_summary.csv", outputs)?;
                writeln!(w, "n_paths,mean,std_err,max,hits")?;
                writeln!(
                    w,
                    "{},{:.16e},{:.16e},{:.16e},{}",
                    summary.n_paths, summary.mean, summary.std_err, summary.max, summary.hits
                )?;
                finish(w)?;
            }
        }
        Form::Vorticity => {
            if sim.alpha != 2.0 {
                bail!(
                    "sim.alpha: the vorticity form needs the free boundary value 2, got {}",
                    sim.alpha
                );
            }
            let model = m.vorticity(sim.n_modes)?;
            let out = run_vorticity_trajectory(&model, sim)?;
            let mut w = create(dir, "vorticity.csv", outputs)?;
            out.write_csv(&mut w)?;
            finish(w)?;
            let wf = model.basis.synthesize(&out.final_state.c)?;
            let mut w = create(dir, "final_vorticity.sdns", outputs)?;
            wf.write_snapshot(&mut w)?;
            finish(w)?;
        }
    }
    Ok(true)
}

fn sweep(cfg: &RunConfig, outputs: &mut Vec<String>) -> Result<bool> {
    let sim = &cfg.sim;
    if sim.alpha != 2.0 {
        bail!(
            "sim.alpha: the viscosity sweep runs the free boundary value 2, got {}",
            sim.alpha
        );
    }
    let m = Models::new(cfg)?;
    let model = m.vorticity(sim.n_modes)?;
    let path = sample_path(sim.seed, sim.n_steps(), sim.dt, model.n_noise());
    let report = viscosity_sweep(&model, sim, &cfg.nu_list, &path)?;
    let mut w = create(&cfg.out_dir, "sweep.csv", outputs)?;
    report.write_csv(&mut w)?;
    finish(w)?;
    log::info!(
        "sweep differences {:?}, sup_t ‖u‖₁ spread {:.3e}",
        report.differences(),
        report.h1_spread()
    );
    Ok(true)
}
