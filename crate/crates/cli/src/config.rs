//! Run configuration: a TOML file flattened to dotted keys, then
//! `key=value` overrides applied on top.
//!
//! Unknown keys are rejected so a typo cannot silently fall back to a
//! default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sdns_core::{BumpParams, CorrectorForm, InitialCondition, Scheme, SimConfig};
use toml::Value;

/// Which Galerkin system `simulate` integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Velocity,
    Vorticity,
}

impl Form {
    fn label(self) -> &'static str {
        match self {
            Form::Velocity => "velocity",
            Form::Vorticity => "vorticity",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSettings {
    /// Number of transport fields; 0 switches the noise off.
    pub modes: usize,
    pub decay_rate: f64,
    pub amplitude: f64,
    pub bump: BumpParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// `sim.seed` carries `noise.seed`.
    pub sim: SimConfig,
    pub form: Form,
    pub noise: NoiseSettings,
    pub n_r: usize,
    pub n_theta: usize,
    pub nu_list: Vec<f64>,
    pub paths: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            form: Form::Velocity,
            noise: NoiseSettings {
                modes: 8,
                decay_rate: 0.5,
                amplitude: 1.5,
                bump: BumpParams::default(),
            },
            n_r: 96,
            n_theta: 64,
            nu_list: vec![0.1, 0.05, 0.025, 0.0125],
            paths: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Reads `path` (if given), applies `overrides` in order and validates.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut flat = BTreeMap::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let table: toml::Table = toml::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        flatten("", &table, &mut flat);
    }
    for o in overrides {
        let (key, value) = parse_override(o)?;
        flat.insert(key, value);
    }
    let mut cfg = RunConfig::default();
    let mut ic = IcKeys::default();
    for (key, value) in &flat {
        apply(&mut cfg, &mut ic, key, value)?;
    }
    cfg.sim.ic = ic.build(&cfg.sim.ic)?;
    validate(&cfg)?;
    Ok(cfg)
}

/// Splits `key=value`; the value is read as a TOML literal, falling back to
/// a bare string so `sim.scheme=ito-euler` needs no quotes.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("override '{s}' is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        bail!("override '{s}' has an empty key");
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

#[derive(Default)]
struct IcKeys {
    kind: Option<String>,
    index: Option<usize>,
    amplitude: Option<f64>,
    seed: Option<u64>,
    h1_norm: Option<f64>,
    bandwidth: Option<usize>,
    coefficients: Option<Vec<f64>>,
}

impl IcKeys {
    fn build(self, default: &InitialCondition) -> Result<InitialCondition> {
        let kind = match (&self.kind, default) {
            (Some(k), _) => k.as_str(),
            (None, InitialCondition::Zero) => "zero",
            (None, InitialCondition::Mode { .. }) => "mode",
            (None, InitialCondition::Coefficients(_)) => "coefficients",
            (None, InitialCondition::Random { .. }) => "random",
        };
        let stray = |names: &[(&str, bool)]| -> Result<()> {
            for (name, set) in names {
                if *set {
                    bail!("sim.ic.{name}: not used by sim.ic.kind = \"{kind}\"");
                }
            }
            Ok(())
        };
        let ic = match kind {
            "zero" => {
                stray(&[
                    ("index", self.index.is_some()),
                    ("amplitude", self.amplitude.is_some()),
                    ("seed", self.seed.is_some()),
                    ("h1_norm", self.h1_norm.is_some()),
                    ("bandwidth", self.bandwidth.is_some()),
                    ("coefficients", self.coefficients.is_some()),
                ])?;
                InitialCondition::Zero
            }
            "mode" => {
                stray(&[
                    ("seed", self.seed.is_some()),
                    ("h1_norm", self.h1_norm.is_some()),
                    ("bandwidth", self.bandwidth.is_some()),
                    ("coefficients", self.coefficients.is_some()),
                ])?;
                let index = self.index.unwrap_or(1);
                if index == 0 {
                    bail!("sim.ic.index: mode indices start at 1");
                }
                InitialCondition::Mode {
                    index,
                    amplitude: self.amplitude.unwrap_or(1.0),
                }
            }
            "random" => {
                stray(&[
                    ("index", self.index.is_some()),
                    ("amplitude", self.amplitude.is_some()),
                    ("coefficients", self.coefficients.is_some()),
                ])?;
                let h1_norm = self.h1_norm.unwrap_or(1.0);
                if !(h1_norm >= 0.0) {
                    bail!("sim.ic.h1_norm: must be non-negative, got {h1_norm}");
                }
                let bandwidth = self.bandwidth.unwrap_or(8);
                if bandwidth == 0 {
                    bail!("sim.ic.bandwidth: must be at least 1");
                }
                InitialCondition::Random {
                    seed: self.seed.unwrap_or(0),
                    h1_norm,
                    bandwidth,
                }
            }
            "coefficients" => {
                stray(&[
                    ("index", self.index.is_some()),
                    ("amplitude", self.amplitude.is_some()),
                    ("seed", self.seed.is_some()),
                    ("h1_norm", self.h1_norm.is_some()),
                    ("bandwidth", self.bandwidth.is_some()),
                ])?;
                InitialCondition::Coefficients(
                    self.coefficients
                        .ok_or_else(|| anyhow!("sim.ic.coefficients: missing"))?,
                )
            }
            other => bail!(
                "sim.ic.kind: unknown initial condition '{other}' \
                 (expected zero, mode, random or coefficients)"
            ),
        };
        Ok(ic)
    }
}

fn type_error(key: &str, want: &str, v: &Value) -> anyhow::Error {
    anyhow!("{key}: expected {want}, got {}", v.type_str())
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(type_error(key, "a number", v)),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::Integer(i) => bail!("{key}: must be non-negative, got {i}"),
        // seeds beyond i64 are easiest to pass as strings
        Value::String(s) => s
            .parse()
            .map_err(|_| anyhow!("{key}: '{s}' is not an unsigned integer")),
        _ => Err(type_error(key, "an unsigned integer", v)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::Integer(i) => bail!("{key}: must be non-negative, got {i}"),
        _ => Err(type_error(key, "a non-negative integer", v)),
    }
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| type_error(key, "a boolean", v))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| type_error(key, "a string", v))
}

fn as_f64_list(key: &str, v: &Value) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| type_error(key, "an array of numbers", v))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| as_f64(&format!("{key}[{i}]"), x))
        .collect()
}

fn apply(cfg: &mut RunConfig, ic: &mut IcKeys, key: &str, v: &Value) -> Result<()> {
    match key {
        "sim.nu" => cfg.sim.nu = as_f64(key, v)?,
        "sim.alpha" => cfg.sim.alpha = as_f64(key, v)?,
        "sim.n_modes" => cfg.sim.n_modes = as_usize(key, v)?,
        "sim.dt" => cfg.sim.dt = as_f64(key, v)?,
        "sim.t_end" => cfg.sim.t_end = as_f64(key, v)?,
        "sim.hitting_M" => cfg.sim.hitting_m = as_f64(key, v)?,
        "sim.scheme" => {
            cfg.sim.scheme = as_str(key, v)?
                .parse::<Scheme>()
                .map_err(|e| anyhow!("{key}: {e}"))?
        }
        "sim.corrector" => {
            cfg.sim.corrector = as_str(key, v)?
                .parse::<CorrectorForm>()
                .map_err(|e| anyhow!("{key}: {e}"))?
        }
        "sim.integrating_factor" => cfg.sim.integrating_factor = as_bool(key, v)?,
        "sim.nonlinear" => cfg.sim.nonlinear = as_bool(key, v)?,
        "sim.form" => {
            cfg.form = match as_str(key, v)? {
                "velocity" => Form::Velocity,
                "vorticity" => Form::Vorticity,
                other => bail!("{key}: unknown form '{other}' (expected velocity or vorticity)"),
            }
        }
        "sim.ic.kind" => ic.kind = Some(as_str(key, v)?.to_string()),
        "sim.ic.index" => ic.index = Some(as_usize(key, v)?),
        "sim.ic.amplitude" => ic.amplitude = Some(as_f64(key, v)?),
        "sim.ic.seed" => ic.seed = Some(as_u64(key, v)?),
        "sim.ic.h1_norm" => ic.h1_norm = Some(as_f64(key, v)?),
        "sim.ic.bandwidth" => ic.bandwidth = Some(as_usize(key, v)?),
        "sim.ic.coefficients" => ic.coefficients = Some(as_f64_list(key, v)?),
        "noise.modes" => cfg.noise.modes = as_usize(key, v)?,
        "noise.decay_rate" => cfg.noise.decay_rate = as_f64(key, v)?,
        "noise.amplitude" => cfg.noise.amplitude = as_f64(key, v)?,
        "noise.seed" => cfg.sim.seed = as_u64(key, v)?,
        "noise.bump.radius" => cfg.noise.bump.radius = as_f64(key, v)?,
        "noise.bump.r_max" => cfg.noise.bump.r_max = as_f64(key, v)?,
        "noise.bump.sharpness" => cfg.noise.bump.sharpness = as_f64(key, v)?,
        "grid.n_r" => cfg.n_r = as_usize(key, v)?,
        "grid.n_theta" => cfg.n_theta = as_usize(key, v)?,
        "sweep.nu_list" => cfg.nu_list = as_f64_list(key, v)?,
        "ensemble.paths" => cfg.paths = as_usize(key, v)?,
        "output.dir" => cfg.out_dir = PathBuf::from(as_str(key, v)?),
        other => bail!("{other}: unknown configuration key"),
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let s = &cfg.sim;
    let positive = |key: &str, v: f64| -> Result<()> {
        if !(v > 0.0 && v.is_finite()) {
            bail!("{key}: must be positive and finite, got {v}");
        }
        Ok(())
    };
    positive("sim.nu", s.nu)?;
    positive("sim.dt", s.dt)?;
    positive("sim.t_end", s.t_end)?;
    if !s.alpha.is_finite() {
        bail!("sim.alpha: must be finite, got {}", s.alpha);
    }
    if s.n_modes == 0 {
        bail!("sim.n_modes: must be at least 1");
    }
    if s.t_end < s.dt {
        bail!(
            "sim.t_end: must be at least sim.dt = {}, got {}",
            s.dt,
            s.t_end
        );
    }
    if !(s.hitting_m > 1.0) {
        bail!("sim.hitting_M: must exceed 1, got {}", s.hitting_m);
    }
    match &s.ic {
        InitialCondition::Mode { index, .. } if *index > s.n_modes => bail!(
            "sim.ic.index: mode {index} is beyond sim.n_modes = {}",
            s.n_modes
        ),
        InitialCondition::Coefficients(c) if c.len() != s.n_modes => bail!(
            "sim.ic.coefficients: expected {} values, got {}",
            s.n_modes,
            c.len()
        ),
        _ => {}
    }
    if cfg.noise.modes > 0 {
        positive("noise.decay_rate", cfg.noise.decay_rate)?;
        if !(cfg.noise.amplitude >= 0.0 && cfg.noise.amplitude.is_finite()) {
            bail!(
                "noise.amplitude: must be non-negative, got {}",
                cfg.noise.amplitude
            );
        }
        let b = &cfg.noise.bump;
        positive("noise.bump.radius", b.radius)?;
        positive("noise.bump.sharpness", b.sharpness)?;
        if !(b.r_max > 0.0 && b.r_max < 1.0) {
            bail!("noise.bump.r_max: must lie in (0, 1), got {}", b.r_max);
        }
        if b.radius > b.r_max {
            bail!(
                "noise.bump.radius: must not exceed noise.bump.r_max = {}, got {}",
                b.r_max,
                b.radius
            );
        }
    }
    if cfg.n_r < 8 {
        bail!("grid.n_r: must be at least 8, got {}", cfg.n_r);
    }
    if cfg.n_theta < 8 || !cfg.n_theta.is_multiple_of(2) {
        bail!(
            "grid.n_theta: must be even and at least 8, got {}",
            cfg.n_theta
        );
    }
    if cfg.nu_list.is_empty() {
        bail!("sweep.nu_list: must not be empty");
    }
    for (i, &nu) in cfg.nu_list.iter().enumerate() {
        positive(&format!("sweep.nu_list[{i}]"), nu)?;
        if i > 0 && nu > cfg.nu_list[i - 1] {
            bail!(
                "sweep.nu_list[{i}]: viscosities must not increase ({nu} follows {})",
                cfg.nu_list[i - 1]
            );
        }
    }
    if cfg.paths == 0 {
        bail!("ensemble.paths: must be at least 1");
    }
    Ok(())
}

impl RunConfig {
    /// The resolved configuration as TOML with every key spelled out. The
    /// manifest hash is taken over this text, so it is stable under key
    /// reordering in the input file.
    pub fn canonical(&self) -> String {
        let s = &self.sim;
        let mut t = String::new();
        let f = |v: f64| format!("{v:?}");
        let _ = writeln!(t, "[sim]");
        let _ = writeln!(t, "nu = {}", f(s.nu));
        let _ = writeln!(t, "alpha = {}", f(s.alpha));
        let _ = writeln!(t, "n_modes = {}", s.n_modes);
        let _ = writeln!(t, "dt = {}", f(s.dt));
        let _ = writeln!(t, "t_end = {}", f(s.t_end));
        let _ = writeln!(t, "hitting_M = {}", f(s.hitting_m));
        let _ = writeln!(t, "scheme = \"{}\"", s.scheme);
        let corrector = match s.corrector {
            CorrectorForm::Galerkin => "galerkin",
            CorrectorForm::Full => "full",
        };
        let _ = writeln!(t, "corrector = \"{corrector}\"");
        let _ = writeln!(t, "integrating_factor = {}", s.integrating_factor);
        let _ = writeln!(t, "nonlinear = {}", s.nonlinear);
        let _ = writeln!(t, "form = \"{}\"", self.form.label());
        let _ = writeln!(t, "\n[sim.ic]");
        match &s.ic {
            InitialCondition::Zero => {
                let _ = writeln!(t, "kind = \"zero\"");
            }
            InitialCondition::Mode { index, amplitude } => {
                let _ = writeln!(
                    t,
                    "kind = \"mode\"\nindex = {index}\namplitude = {}",
                    f(*amplitude)
                );
            }
            InitialCondition::Random {
                seed,
                h1_norm,
                bandwidth,
            } => {
                let _ = writeln!(
                    t,
                    "kind = \"random\"\nseed = {seed}\nh1_norm = {}\nbandwidth = {bandwidth}",
                    f(*h1_norm)
                );
            }
            InitialCondition::Coefficients(c) => {
                let list: Vec<String> = c.iter().map(|v| f(*v)).collect();
                let _ = writeln!(
                    t,
                    "kind = \"coefficients\"\ncoefficients = [{}]",
                    list.join(", ")
                );
            }
        }
        let n = &self.noise;
        let _ = writeln!(t, "\n[noise]");
        let _ = writeln!(t, "modes = {}", n.modes);
        let _ = writeln!(t, "decay_rate = {}", f(n.decay_rate));
        let _ = writeln!(t, "amplitude = {}", f(n.amplitude));
        // quoted: TOML integers stop at i64
        let _ = writeln!(t, "seed = \"{}\"", s.seed);
        let _ = writeln!(t, "\n[noise.bump]");
        let _ = writeln!(t, "radius = {}", f(n.bump.radius));
        let _ = writeln!(t, "r_max = {}", f(n.bump.r_max));
        let _ = writeln!(t, "sharpness = {}", f(n.bump.sharpness));
        let _ = writeln!(
            t,
            "\n[grid]\nn_r = {}\nn_theta = {}",
            self.n_r, self.n_theta
        );
        let nus: Vec<String> = self.nu_list.iter().map(|v| f(*v)).collect();
        let _ = writeln!(t, "\n[sweep]\nnu_list = [{}]", nus.join(", "));
        let _ = writeln!(t, "\n[ensemble]\npaths = {}", self.paths);
        t
    }
}
