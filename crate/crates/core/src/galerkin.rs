//! Velocity-form Galerkin system and its time steppers.
//!
//! With `u = Σ c_k a_k` the truncated Itô equation reads
//!
//! ```text
//! dc = [−N(c) − ν Λ c + ½ Σ_i C_i c] dt − Σ_i G_i c dW^i
//! N(c)_k = Σ_{jl} T_kjl c_j c_l,   T_kjl = ⟨a_j·∇a_l, a_k⟩,   G_i,kj = ⟨𝒫B_i a_j, a_k⟩
//! ```
//!
//! `C_i` is the Itô corrector. The Stratonovich Heun scheme integrates the
//! same system without the corrector. Because `a_k` are divergence-free with
//! zero normal trace, `⟨𝒫f, a_k⟩ = ⟨f, a_k⟩`, so the tensors are projected
//! by analysis alone.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::noise::{sample_path, trajectory_seed, BrownianPath, NoiseModel};
use crate::ops::Operators;

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ItoEuler,
    StratHeun,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ito-euler" => Ok(Scheme::ItoEuler),
            "strat-heun" => Ok(Scheme::StratHeun),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected ito-euler or strat-heun)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::ItoEuler => "ito-euler",
            Scheme::StratHeun => "strat-heun",
        })
    }
}

/// How the Itô corrector `½ Σ 𝒫̄_n 𝒫B_i² u` is discretised.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectorForm {
    /// `½ Σ G_i²`: the exact Itô–Stratonovich conversion of the truncated
    /// system, so both schemes converge to the same limit.
    Galerkin,
    /// `½ Σ 𝒫̄_n (𝒫B_i)²` with the inner field left untruncated.
    Full,
}

impl std::str::FromStr for CorrectorForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin" => Ok(CorrectorForm::Galerkin),
            "full" => Ok(CorrectorForm::Full),
            other => Err(Error::InvalidArgument(format!(
                "unknown corrector '{other}' (expected galerkin or full)"
            ))),
        }
    }
}

/// Initial velocity.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// `amplitude · a_index` (index from 1).
    Mode {
        index: usize,
        amplitude: f64,
    },
    Coefficients(Vec<f64>),
    /// Gaussian coefficients on the first `bandwidth` modes, rescaled to the
    /// given gradient norm `‖u₀‖₁`.
    Random {
        seed: u64,
        h1_norm: f64,
        bandwidth: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub nu: f64,
    pub alpha: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub hitting_m: f64,
    pub scheme: Scheme,
    pub corrector: CorrectorForm,
    pub integrating_factor: bool,
    pub nonlinear: bool,
    pub ic: InitialCondition,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            nu: 0.05,
            alpha: 2.0,
            n_modes: 16,
            dt: 1e-3,
            t_end: 1.0,
            hitting_m: 100.0,
            scheme: Scheme::StratHeun,
            corrector: CorrectorForm::Galerkin,
            integrating_factor: false,
            nonlinear: true,
            ic: InitialCondition::Mode {
                index: 1,
                amplitude: 1.0,
            },
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return bad(format!("nu = {} must be positive", self.nu));
        }
        if !self.alpha.is_finite() {
            return bad(format!("alpha = {} must be finite", self.alpha));
        }
        if self.n_modes == 0 {
            return bad("n_modes must be at least 1".into());
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= self.dt) {
            return bad(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            ));
        }
        if !(self.hitting_m > 1.0) {
            return bad(format!("hitting_M = {} must exceed 1", self.hitting_m));
        }
        if self.alpha < 1.0 {
            log::warn!("alpha = {} is below the boundary curvature", self.alpha);
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

/// A quadratic SDE in coefficient space,
///
/// ```text
/// dc = [−Q(c, c) − ν diag(rates) c + ½ Σ C_i c] dt − Σ_i G_i c dW^i
/// ```
///
/// shared by the velocity and vorticity formulations.
#[derive(Clone, Debug)]
pub struct SpectralSystem {
    pub rates: Vec<f64>,
    /// `Q(c, c)_k = Σ_{jl} tensor[(k·n + j)·n + l] c_j c_l`.
    pub tensor: Vec<f64>,
    /// `G_i`, row-major.
    pub noise_mats: Vec<Vec<f64>>,
    pub galerkin_corrector: Vec<f64>,
    pub full_corrector: Vec<f64>,
}

fn matvec(m: &[f64], c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|k| {
            m[k * n..(k + 1) * n]
                .iter()
                .zip(c)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

impl SpectralSystem {
    /// Assembles the corrector sums from per-field `G_i` and the untruncated
    /// `𝒫̄_n(𝒫B_i)²` matrices.
    pub fn new(rates: Vec<f64>, tensor: Vec<f64>, fields: Vec<(Vec<f64>, Vec<f64>)>) -> Self {
        let n = rates.len();
        let mut galerkin_corrector = vec![0.0; n * n];
        let mut full_corrector = vec![0.0; n * n];
        let mut noise_mats = Vec::with_capacity(fields.len());
        for (g, full) in fields {
            let g2 = crate::quadrature::matmul(&g, &g, n);
            for p in 0..n * n {
                galerkin_corrector[p] += 0.5 * g2[p];
                full_corrector[p] += 0.5 * full[p];
            }
            noise_mats.push(g);
        }
        Self {
            rates,
            tensor,
            noise_mats,
            galerkin_corrector,
            full_corrector,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.rates.len()
    }

    pub fn n_noise(&self) -> usize {
        self.noise_mats.len()
    }

    /// `Q(c, c)`.
    pub fn nonlinear(&self, c: &[f64]) -> Vec<f64> {
        let n = c.len();
        (0..n)
            .map(|k| {
                let t = &self.tensor[k * n * n..(k + 1) * n * n];
                let mut s = 0.0;
                for j in 0..n {
                    if c[j] == 0.0 {
                        continue;
                    }
                    let row = &t[j * n..(j + 1) * n];
                    s += c[j] * row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
                }
                s
            })
            .collect()
    }

    pub fn corrector_matrix(&self, form: CorrectorForm) -> &[f64] {
        match form {
            CorrectorForm::Galerkin => &self.galerkin_corrector,
            CorrectorForm::Full => &self.full_corrector,
        }
    }

    /// Drift without the Itô corrector; the viscous part is left out when
    /// `with_viscous` is false.
    fn base_drift(&self, c: &[f64], cfg: &SimConfig, with_viscous: bool) -> Vec<f64> {
        let mut d = if cfg.nonlinear {
            self.nonlinear(c).into_iter().map(|v| -v).collect()
        } else {
            vec![0.0; c.len()]
        };
        if with_viscous {
            for ((d, l), c) in d.iter_mut().zip(&self.rates).zip(c) {
                *d -= cfg.nu * l * c;
            }
        }
        d
    }

    fn add_corrector(&self, d: &mut [f64], c: &[f64], cfg: &SimConfig) {
        if !self.noise_mats.is_empty() {
            for (d, v) in d
                .iter_mut()
                .zip(matvec(self.corrector_matrix(cfg.corrector), c))
            {
                *d += v;
            }
        }
    }

    /// Itô drift, corrector included.
    pub fn drift(&self, c: &[f64], cfg: &SimConfig) -> Vec<f64> {
        let mut d = self.base_drift(c, cfg, true);
        self.add_corrector(&mut d, c, cfg);
        d
    }

    /// `g_i(c) = −G_i c`, one vector per noise field.
    pub fn diffusion(&self, c: &[f64]) -> Vec<Vec<f64>> {
        self.noise_mats
            .iter()
            .map(|g| matvec(g, c).into_iter().map(|v| -v).collect())
            .collect()
    }

    fn noise_sum(&self, c: &[f64], dw: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; c.len()];
        for (g, w) in self.noise_mats.iter().zip(dw) {
            if *w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(matvec(g, c)) {
                *o -= w * v;
            }
        }
        out
    }

    fn viscous_factor(&self, cfg: &SimConfig, dt: f64) -> Vec<f64> {
        self.rates
            .iter()
            .map(|l| (-cfg.nu * l * dt).exp())
            .collect()
    }

    /// One Euler–Maruyama step of the Itô system.
    pub fn step_ito(&self, c: &[f64], dw: &[f64], dt: f64, cfg: &SimConfig) -> Vec<f64> {
        let if_on = cfg.integrating_factor;
        let mut d = self.base_drift(c, cfg, !if_on);
        self.add_corrector(&mut d, c, cfg);
        let noise = self.noise_sum(c, dw);
        let mut out: Vec<f64> = (0..c.len()).map(|k| c[k] + d[k] * dt + noise[k]).collect();
        if if_on {
            for (o, e) in out.iter_mut().zip(self.viscous_factor(cfg, dt)) {
                *o *= e;
            }
        }
        out
    }

    /// One Heun predictor–corrector step of the Stratonovich system.
    pub fn step_strat_heun(&self, c: &[f64], dw: &[f64], dt: f64, cfg: &SimConfig) -> Vec<f64> {
        let n = c.len();
        let if_on = cfg.integrating_factor;
        let f0 = self.base_drift(c, cfg, !if_on);
        let g0 = self.noise_sum(c, dw);
        let incr0: Vec<f64> = (0..n).map(|k| f0[k] * dt + g0[k]).collect();
        if if_on {
            let e = self.viscous_factor(cfg, dt);
            let pred: Vec<f64> = (0..n).map(|k| e[k] * (c[k] + incr0[k])).collect();
            let f1 = self.base_drift(&pred, cfg, false);
            let g1 = self.noise_sum(&pred, dw);
            (0..n)
                .map(|k| e[k] * (c[k] + 0.5 * incr0[k]) + 0.5 * (f1[k] * dt + g1[k]))
                .collect()
        } else {
            let pred: Vec<f64> = (0..n).map(|k| c[k] + incr0[k]).collect();
            let f1 = self.base_drift(&pred, cfg, true);
            let g1 = self.noise_sum(&pred, dw);
            (0..n)
                .map(|k| c[k] + 0.5 * (incr0[k] + f1[k] * dt + g1[k]))
                .collect()
        }
    }

    pub fn step(&self, c: &[f64], dw: &[f64], dt: f64, cfg: &SimConfig) -> Vec<f64> {
        match cfg.scheme {
            Scheme::ItoEuler => self.step_ito(c, dw, dt, cfg),
            Scheme::StratHeun => self.step_strat_heun(c, dw, dt, cfg),
        }
    }
}

/// Symmetric Gram matrix `⟨∇f_j, ∇f_k⟩` of vector jets.
pub(crate) fn h1_gram(ops: &Operators, jets: &[crate::field::VectorJet]) -> Vec<f64> {
    let n = jets.len();
    let mut g = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..=j {
            let v = ops.inner_h1_jets(&jets[j], &jets[k]);
            g[j * n + k] = v;
            g[k * n + j] = v;
        }
    }
    g
}

pub(crate) fn quadratic_form(m: &[f64], c: &[f64]) -> f64 {
    c.iter().zip(matvec(m, c)).map(|(a, b)| a * b).sum()
}

/// Precomputed velocity Galerkin system for one basis and noise model.
pub struct GalerkinModel {
    pub basis: Arc<BasisSet>,
    pub ops: Arc<Operators>,
    pub system: SpectralSystem,
    /// `⟨a_j, a_k⟩₁`.
    pub h1_gram: Vec<f64>,
}

impl std::fmt::Debug for GalerkinModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GalerkinModel")
            .field("n_modes", &self.system.n_modes())
            .field("noise_fields", &self.system.n_noise())
            .finish()
    }
}

impl GalerkinModel {
    pub fn new(basis: Arc<BasisSet>, ops: Arc<Operators>, noise: &NoiseModel) -> Result<Self> {
        let n = basis.len();
        let grid = basis.grid().clone();
        if ops.grid().shape() != grid.shape() {
            return Err(Error::GridMismatch {
                expected: grid.shape(),
                found: ops.grid().shape(),
            });
        }
        let jets = basis.jets();
        let padded: Vec<_> = jets.par_iter().map(|j| ops.pad_jet(j)).collect();

        let columns: Vec<Vec<f64>> = (0..n * n)
            .into_par_iter()
            .map(|jl| {
                let (j, l) = (jl / n, jl % n);
                basis
                    .analyze(&ops.advect_padded(&padded[j], &padded[l]))
                    .expect("grid checked")
            })
            .collect();
        let mut tensor = vec![0.0; n * n * n];
        for (jl, col) in columns.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                tensor[k * n * n + jl] = *v;
            }
        }

        let xi_jets: Vec<_> = noise.fields.iter().map(|f| f.jet(&grid)).collect();
        let fields: Vec<(Vec<f64>, Vec<f64>)> = xi_jets
            .par_iter()
            .map(|xj| -> Result<(Vec<f64>, Vec<f64>)> {
                let xp = ops.pad_jet(xj);
                let mut g = vec![0.0; n * n];
                let mut full = vec![0.0; n * n];
                for j in 0..n {
                    let b = ops.salt_b_padded(&xp, &padded[j]);
                    let col = basis.analyze(&b)?;
                    let pb = ops.leray_project(&b)?;
                    let col2 = basis.analyze(&ops.leray_project(&ops.salt_b(xj, &pb)?)?)?;
                    for k in 0..n {
                        g[k * n + j] = col[k];
                        full[k * n + j] = col2[k];
                    }
                }
                Ok((g, full))
            })
            .collect::<Result<_>>()?;

        let h1_gram = h1_gram(&ops, jets);
        Ok(Self {
            system: SpectralSystem::new(basis.lambdas(), tensor, fields),
            basis,
            ops,
            h1_gram,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.system.n_modes()
    }

    pub fn n_noise(&self) -> usize {
        self.system.n_noise()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.system.rates
    }

    /// Coefficients of `𝒫̄_n ℒ_u u`.
    pub fn nonlinear(&self, c: &[f64]) -> Vec<f64> {
        self.system.nonlinear(c)
    }

    /// Itô drift `−𝒫̄_n𝒫ℒ_u u − νAu + ½Σ 𝒫̄_n𝒫B_i²u` in coefficients.
    pub fn drift(&self, c: &[f64], cfg: &SimConfig) -> Vec<f64> {
        self.system.drift(c, cfg)
    }

    /// `g_i(c) = −𝒫̄_n𝒫B_i u`.
    pub fn diffusion(&self, c: &[f64]) -> Vec<Vec<f64>> {
        self.system.diffusion(c)
    }

    pub fn step(&self, c: &[f64], dw: &[f64], dt: f64, cfg: &SimConfig) -> Vec<f64> {
        self.system.step(c, dw, dt, cfg)
    }

    pub fn l2_sq(&self, c: &[f64]) -> f64 {
        c.iter().map(|v| v * v).sum()
    }

    pub fn h1_sq(&self, c: &[f64]) -> f64 {
        quadratic_form(&self.h1_gram, c)
    }

    /// `‖u‖_H² = ⟨Au, u⟩ = Σ λ_k c_k²`.
    pub fn h_sq(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(&self.system.rates)
            .map(|(c, l)| l * c * c)
            .sum()
    }

    /// Initial coefficients for `ic`.
    pub fn initial(&self, ic: &InitialCondition) -> Result<Vec<f64>> {
        initial_coefficients(ic, self.n_modes(), &self.h1_gram)
    }
}

/// Velocity coefficients for `ic` over `n` modes with gradient Gram `h1`.
pub(crate) fn initial_coefficients(
    ic: &InitialCondition,
    n: usize,
    h1: &[f64],
) -> Result<Vec<f64>> {
    match ic {
        InitialCondition::Zero => Ok(vec![0.0; n]),
        InitialCondition::Mode { index, amplitude } => {
            if *index == 0 || *index > n {
                return Err(Error::InvalidArgument(format!(
                    "initial mode {index} is outside 1..={n}"
                )));
            }
            let mut c = vec![0.0; n];
            c[index - 1] = *amplitude;
            Ok(c)
        }
        InitialCondition::Coefficients(v) => {
            if v.len() > n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            let mut c = v.clone();
            c.resize(n, 0.0);
            Ok(c)
        }
        InitialCondition::Random {
            seed,
            h1_norm,
            bandwidth,
        } => {
            let band = (*bandwidth).clamp(1, n);
            let mut c = sample_path(*seed, 1, 1.0, band).increments;
            c.resize(n, 0.0);
            let norm = quadratic_form(h1, &c).sqrt();
            if norm > 0.0 {
                for v in c.iter_mut() {
                    *v *= h1_norm / norm;
                }
            }
            Ok(c)
        }
    }
}

/// One output row of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub t: f64,
    pub l2_sq: f64,
    pub h1_sq: f64,
    pub h_sq: f64,
    pub energy_defect: f64,
    pub hit: bool,
}

/// Time, coefficients and the running energy ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub step: usize,
    pub c: Vec<f64>,
    pub l2_sq_0: f64,
    pub sup_l2_sq: f64,
    /// `∫ ‖u‖₁² ds` (trapezoid).
    pub int_h1_sq: f64,
    /// `∫ ‖u‖_H² ds` (trapezoid).
    pub int_h_sq: f64,
    last_h1_sq: f64,
    last_h_sq: f64,
    pub hit_time: Option<f64>,
}

impl SolverState {
    pub fn new(model: &GalerkinModel, c: Vec<f64>) -> Self {
        let l2 = model.l2_sq(&c);
        Self {
            t: 0.0,
            step: 0,
            l2_sq_0: l2,
            sup_l2_sq: l2,
            int_h1_sq: 0.0,
            int_h_sq: 0.0,
            last_h1_sq: model.h1_sq(&c),
            last_h_sq: model.h_sq(&c),
            c,
            hit_time: None,
        }
    }

    /// `sup ‖u‖² + ∫ ‖u‖₁²`, the quantity the hitting time watches.
    pub fn hitting_functional(&self) -> f64 {
        self.sup_l2_sq + self.int_h1_sq
    }

    pub fn row(&self, model: &GalerkinModel, nu: f64) -> Row {
        let l2 = model.l2_sq(&self.c);
        Row {
            t: self.t,
            l2_sq: l2,
            h1_sq: self.last_h1_sq,
            h_sq: self.last_h_sq,
            energy_defect: l2 + 2.0 * nu * self.int_h_sq - self.l2_sq_0,
            hit: self.hit_time.is_some(),
        }
    }

    /// Advances one step and updates the ledger; a no-op once hit.
    pub fn advance(
        &mut self,
        model: &GalerkinModel,
        cfg: &SimConfig,
        dw: &[f64],
        dt: f64,
    ) -> Result<()> {
        if self.hit_time.is_some() {
            return Ok(());
        }
        let next = model.step(&self.c, dw, dt, cfg);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                t: self.t + dt,
                step: self.step + 1,
                path: None,
            });
        }
        let (h1, h) = (model.h1_sq(&next), model.h_sq(&next));
        self.int_h1_sq += 0.5 * dt * (self.last_h1_sq + h1);
        self.int_h_sq += 0.5 * dt * (self.last_h_sq + h);
        self.last_h1_sq = h1;
        self.last_h_sq = h;
        self.sup_l2_sq = self.sup_l2_sq.max(model.l2_sq(&next));
        self.c = next;
        self.step += 1;
        self.t = self.step as f64 * dt;
        if self.hitting_functional() >= cfg.hitting_m + self.l2_sq_0 {
            self.hit_time = Some(self.t);
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryOutput {
    pub rows: Vec<Row>,
    pub final_state: SolverState,
    pub hit_time: Option<f64>,
}

impl TrajectoryOutput {
    /// `sup ‖u‖² + ν ∫ ‖u‖₁²` up to the stopping time.
    pub fn stopped_energy(&self, nu: f64) -> f64 {
        self.final_state.sup_l2_sq + nu * self.final_state.int_h1_sq
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,l2_sq,h1_sq,H_sq,energy_defect,hit_flag")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.t,
                r.l2_sq,
                r.h1_sq,
                r.h_sq,
                r.energy_defect,
                u8::from(r.hit)
            )?;
        }
        Ok(())
    }
}

/// Integrates along a given Brownian path, stopping at the hitting time.
pub fn run_with_path(
    model: &GalerkinModel,
    cfg: &SimConfig,
    c0: Vec<f64>,
    path: &BrownianPath,
) -> Result<TrajectoryOutput> {
    if path.m != model.n_noise() {
        return Err(Error::InvalidArgument(format!(
            "path drives {} motions but the model has {} noise fields",
            path.m,
            model.n_noise()
        )));
    }
    let mut state = SolverState::new(model, c0);
    let mut rows = vec![state.row(model, cfg.nu)];
    for s in 0..path.n_steps {
        state.advance(model, cfg, path.step(s), path.dt)?;
        rows.push(state.row(model, cfg.nu));
        if state.hit_time.is_some() {
            break;
        }
    }
    Ok(TrajectoryOutput {
        rows,
        hit_time: state.hit_time,
        final_state: state,
    })
}

/// Runs one trajectory with the path drawn from `cfg.seed`.
pub fn run_trajectory(model: &GalerkinModel, cfg: &SimConfig) -> Result<TrajectoryOutput> {
    cfg.validate()?;
    let path = sample_path(cfg.seed, cfg.n_steps(), cfg.dt, model.n_noise());
    run_with_path(model, cfg, model.initial(&cfg.ic)?, &path)
}

/// Statistics of the stopped energy over independent paths.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub n_paths: usize,
    pub values: Vec<f64>,
    pub mean: f64,
    pub max: f64,
    pub std_err: f64,
    pub hits: usize,
}

/// `sup ‖u‖² + ν∫‖u‖₁²` over `n_paths` trajectories with seeds `seed ⊕ p`.
pub fn ensemble(model: &GalerkinModel, cfg: &SimConfig, n_paths: usize) -> Result<EnsembleSummary> {
    cfg.validate()?;
    if n_paths == 0 {
        return Err(Error::InvalidArgument(
            "ensemble needs at least one path".into(),
        ));
    }
    let c0 = model.initial(&cfg.ic)?;
    let outs: Vec<(f64, bool)> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let path = sample_path(
                trajectory_seed(cfg.seed, p),
                cfg.n_steps(),
                cfg.dt,
                model.n_noise(),
            );
            run_with_path(model, cfg, c0.clone(), &path)
                .map(|o| (o.stopped_energy(cfg.nu), o.hit_time.is_some()))
                .map_err(|e| match e {
                    Error::BlowUp { t, step, .. } => Error::BlowUp {
                        t,
                        step,
                        path: Some(p),
                    },
                    other => other,
                })
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = outs.iter().map(|o| o.0).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(EnsembleSummary {
        n_paths,
        max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        std_err: (var / n).sqrt(),
        hits: outs.iter().filter(|o| o.1).count(),
        mean,
        values,
    })
}
