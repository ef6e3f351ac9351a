//! Vorticity form for the free boundary condition `α = 2`.
//!
//! With `α = 2` the rim vorticity vanishes, so `w = curl u` lives in
//! `W^{1,2}_0` and is expanded in the Dirichlet Fourier–Bessel modes
//! `b_k = N_k J_n(σ_k r) T(nθ)`, `J_n(σ_k) = 0`. These share `(n, parity, k,
//! σ)` with the `α = 2` Stokes modes, and `a_k = ∇^⊥b_k / σ_k`, so velocity
//! coefficients are `v_k = −c_k / σ_k`.
//!
//! ```text
//! dc = [−V(c, c) − ν σ² c + ½ Σ_i L_i² c] dt − Σ_i L_i c dW^i
//! V_kjl = ⟨u(b_j)·∇b_l, b_k⟩,   u(b_j) = −∇^⊥b_j / σ_j²,   L_i,kl = ⟨ξ_i·∇b_l, b_k⟩
//! ```
//!
//! Transport by a divergence-free field tangent to the rim is
//! antisymmetric, so `L_i` and `V_k·l` are skew in `(k, l)`. Quadrature
//! leaves a residual asymmetry (logged); the assembled matrices are replaced
//! by their skew parts so the discrete enstrophy balance carries no bias from
//! it.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{stokes_spectrum, BasisSet, Parity};
use crate::bessel::{bessel_j_orders, derivative_from_orders};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::galerkin::{h1_gram, initial_coefficients, quadratic_form, SimConfig, SpectralSystem};
use crate::grid::DiskGrid;
use crate::noise::{sample_path, BrownianPath, NoiseModel};
use crate::ops::Operators;

/// One Dirichlet Fourier–Bessel mode, normalised in `L²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletMode {
    pub n: u32,
    pub parity: Parity,
    pub k: u32,
    pub sigma: f64,
    pub norm_const: f64,
}

impl DirichletMode {
    pub fn new(n: u32, parity: Parity, k: u32, sigma: f64) -> Self {
        let j = bessel_j_orders(n as usize + 1, sigma);
        let ang = if n == 0 {
            2.0 * std::f64::consts::PI
        } else {
            std::f64::consts::PI
        };
        let norm_sq = ang * 0.5 * j[n as usize + 1].powi(2);
        Self {
            n,
            parity,
            k,
            sigma,
            norm_const: 1.0 / norm_sq.sqrt(),
        }
    }

    /// Value and Cartesian gradient at polar `(r, θ)`.
    pub fn eval_polar(&self, r: f64, theta: f64) -> (f64, [f64; 2]) {
        let n = self.n as usize;
        let j = bessel_j_orders(n + 1, self.sigma * r);
        let t = self.parity.trig(self.n, theta);
        let nc = self.norm_const;
        let fr = nc * self.sigma * derivative_from_orders(n, &j) * t[0];
        let ft = nc * j[n] * t[1];
        let (c, s) = (theta.cos(), theta.sin());
        (nc * j[n] * t[0], [c * fr - s / r * ft, s * fr + c / r * ft])
    }
}

/// Dirichlet modes sampled on a grid, ordered like the `α = 2` Stokes modes.
pub struct DirichletBasis {
    grid: Arc<DiskGrid>,
    modes: Vec<DirichletMode>,
    values: Vec<Vec<f64>>,
    grads: Vec<[Vec<f64>; 2]>,
}

impl std::fmt::Debug for DirichletBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletBasis")
            .field("modes", &self.modes.len())
            .finish()
    }
}

impl DirichletBasis {
    pub fn build(n_modes: usize, grid: Arc<DiskGrid>) -> Result<Self> {
        let spectrum = stokes_spectrum(2.0, n_modes)?;
        let modes: Vec<DirichletMode> = spectrum
            .modes
            .iter()
            .map(|m| DirichletMode::new(m.n, m.parity, m.k, m.sigma))
            .collect();
        let max_n = modes.iter().map(|m| m.n as usize).max().unwrap_or(0);
        let max_k = modes.iter().map(|m| m.k as usize).max().unwrap_or(0);
        if grid.n_theta() < 2 * max_n + 2 || grid.n_r() < 2 * max_k {
            return Err(Error::GridTooCoarse(format!(
                "grid {}x{} cannot resolve angular order {max_n} and radial index {max_k}",
                grid.n_r(),
                grid.n_theta()
            )));
        }
        let sampled: Vec<(Vec<f64>, [Vec<f64>; 2])> = modes
            .par_iter()
            .map(|m| {
                let nt = grid.n_theta();
                let mut v = vec![0.0; grid.len()];
                let mut gx = vec![0.0; grid.len()];
                let mut gy = vec![0.0; grid.len()];
                for (i, &r) in grid.radii().iter().enumerate() {
                    for (jt, &th) in grid.angles().iter().enumerate() {
                        let (val, g) = m.eval_polar(r, th);
                        let p = i * nt + jt;
                        v[p] = val;
                        gx[p] = g[0];
                        gy[p] = g[1];
                    }
                }
                (v, [gx, gy])
            })
            .collect();
        for (m, (v, _)) in modes.iter().zip(&sampled) {
            let norm = grid.integrate_product(v, v);
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::GridTooCoarse(format!(
                    "Dirichlet mode (n={}, {}, k={}) has quadrature norm {norm}",
                    m.n,
                    m.parity.label(),
                    m.k
                )));
            }
        }
        let (values, grads) = sampled.into_iter().unzip();
        Ok(Self {
            grid,
            modes,
            values,
            grads,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[DirichletMode] {
        &self.modes
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.sigma).collect()
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn gradient(&self, k: usize) -> &[Vec<f64>; 2] {
        &self.grads[k]
    }

    /// `c_k = ⟨w, b_k⟩`.
    pub fn analyze(&self, w: &ScalarField) -> Result<Vec<f64>> {
        w.check(&self.grid)?;
        Ok(self
            .values
            .iter()
            .map(|b| self.grid.integrate_product(&w.data, b))
            .collect())
    }

    pub fn synthesize(&self, c: &[f64]) -> Result<ScalarField> {
        if c.len() > self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                found: c.len(),
            });
        }
        let mut out = vec![0.0; self.grid.len()];
        for (ck, b) in c.iter().zip(&self.values) {
            if *ck != 0.0 {
                for (o, v) in out.iter_mut().zip(b) {
                    *o += ck * v;
                }
            }
        }
        Ok(ScalarField::from_data(&self.grid, out))
    }
}

fn skew_part(m: &mut [f64], n: usize) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..n {
        for l in 0..=k {
            let (a, b) = (m[k * n + l], m[l * n + k]);
            worst = worst.max((a + b).abs());
            let s = 0.5 * (a - b);
            m[k * n + l] = s;
            m[l * n + k] = -s;
        }
    }
    worst
}

/// Precomputed vorticity Galerkin system.
pub struct VorticityModel {
    pub basis: Arc<DirichletBasis>,
    /// The `α = 2` Stokes basis carrying the recovered velocity.
    pub velocity_basis: Arc<BasisSet>,
    pub ops: Arc<Operators>,
    pub system: SpectralSystem,
    pub sigmas: Vec<f64>,
    /// `⟨a_j, a_k⟩₁` of the velocity modes.
    pub velocity_h1_gram: Vec<f64>,
    /// Largest `|M_kl + M_lk|` removed when skew-symmetrising.
    pub raw_asymmetry: f64,
}

impl std::fmt::Debug for VorticityModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VorticityModel")
            .field("n_modes", &self.system.n_modes())
            .field("noise_fields", &self.system.n_noise())
            .finish()
    }
}

impl VorticityModel {
    pub fn new(
        basis: Arc<DirichletBasis>,
        velocity_basis: Arc<BasisSet>,
        ops: Arc<Operators>,
        noise: &NoiseModel,
    ) -> Result<Self> {
        if velocity_basis.alpha() != 2.0 {
            return Err(Error::InvalidArgument(format!(
                "the vorticity form needs alpha = 2, got {}",
                velocity_basis.alpha()
            )));
        }
        let n = basis.len();
        if velocity_basis.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: velocity_basis.len(),
            });
        }
        let grid = basis.grid().clone();
        for other in [velocity_basis.grid(), ops.grid()] {
            if other.shape() != grid.shape() {
                return Err(Error::GridMismatch {
                    expected: grid.shape(),
                    found: other.shape(),
                });
            }
        }
        let sigmas = basis.sigmas();

        let pad_grad = |k: usize| [grid.pad(&basis.grads[k][0]), grid.pad(&basis.grads[k][1])];
        let grads: Vec<[Vec<f64>; 2]> = (0..n).into_par_iter().map(pad_grad).collect();
        // u(b_j) = (∂₂b_j, −∂₁b_j) / σ_j².
        let vels: Vec<[Vec<f64>; 2]> = (0..n)
            .map(|j| {
                let s2 = sigmas[j] * sigmas[j];
                [
                    grads[j][1].iter().map(|v| v / s2).collect(),
                    grads[j][0].iter().map(|v| -v / s2).collect(),
                ]
            })
            .collect();
        let transport = |phi: &[Vec<f64>; 2], l: usize| -> Result<Vec<f64>> {
            let fine: Vec<f64> = (0..phi[0].len())
                .map(|p| phi[0][p] * grads[l][0][p] + phi[1][p] * grads[l][1][p])
                .collect();
            basis.analyze(&ScalarField::from_data(&grid, grid.unpad(&fine)))
        };

        let columns: Vec<Vec<f64>> = (0..n * n)
            .into_par_iter()
            .map(|jl| transport(&vels[jl / n], jl % n))
            .collect::<Result<_>>()?;
        let mut tensor = vec![0.0; n * n * n];
        let mut raw_asymmetry = 0.0_f64;
        for j in 0..n {
            let mut slice = vec![0.0; n * n];
            for l in 0..n {
                for k in 0..n {
                    slice[k * n + l] = columns[j * n + l][k];
                }
            }
            raw_asymmetry = raw_asymmetry.max(skew_part(&mut slice, n));
            for k in 0..n {
                for l in 0..n {
                    tensor[k * n * n + j * n + l] = slice[k * n + l];
                }
            }
        }

        let fields: Vec<(Vec<f64>, Vec<f64>, f64)> = noise
            .fields
            .par_iter()
            .map(|xi| -> Result<(Vec<f64>, Vec<f64>, f64)> {
                let xv = xi.sample(&grid);
                let xp = [grid.pad(&xv.u1), grid.pad(&xv.u2)];
                let mut l_mat = vec![0.0; n * n];
                let mut full = vec![0.0; n * n];
                for l in 0..n {
                    let col = transport(&xp, l)?;
                    let lb = ops.dot_padded(&xv, &basis.grads[l]);
                    let llb = ops.advect_scalar(&xv, &ScalarField::from_data(&grid, lb))?;
                    let col2 = basis.analyze(&llb)?;
                    for k in 0..n {
                        l_mat[k * n + l] = col[k];
                        full[k * n + l] = col2[k];
                    }
                }
                let asym = skew_part(&mut l_mat, n);
                Ok((l_mat, full, asym))
            })
            .collect::<Result<_>>()?;
        for f in &fields {
            raw_asymmetry = raw_asymmetry.max(f.2);
        }
        log::debug!("vorticity transport matrices: raw asymmetry {raw_asymmetry:.3e}");
        let fields = fields.into_iter().map(|(l, f, _)| (l, f)).collect();

        let rates = sigmas.iter().map(|s| s * s).collect();
        let velocity_h1_gram = h1_gram(&ops, velocity_basis.jets());
        Ok(Self {
            system: SpectralSystem::new(rates, tensor, fields),
            basis,
            velocity_basis,
            ops,
            sigmas,
            velocity_h1_gram,
            raw_asymmetry,
        })
    }

    /// Builds both bases on `grid` and assembles the model.
    pub fn build(n_modes: usize, grid: Arc<DiskGrid>, noise: &NoiseModel) -> Result<Self> {
        let ops = Arc::new(Operators::new(grid.clone())?);
        let basis = Arc::new(DirichletBasis::build(n_modes, grid.clone())?);
        let vb = Arc::new(BasisSet::build(2.0, n_modes, grid)?);
        Self::new(basis, vb, ops, noise)
    }

    pub fn n_modes(&self) -> usize {
        self.system.n_modes()
    }

    pub fn n_noise(&self) -> usize {
        self.system.n_noise()
    }

    /// Coefficients of `ℒ_u w` with `u` recovered from `w`.
    pub fn nonlinear(&self, c: &[f64]) -> Vec<f64> {
        self.system.nonlinear(c)
    }

    /// Itô drift `−ℒ_u w + νΔw + ½Σℒ_i²w` in coefficients.
    pub fn drift(&self, c: &[f64], cfg: &SimConfig) -> Vec<f64> {
        self.system.drift(c, cfg)
    }

    pub fn step(&self, c: &[f64], dw: &[f64], dt: f64, cfg: &SimConfig) -> Vec<f64> {
        self.system.step(c, dw, dt, cfg)
    }

    /// `‖w‖²`.
    pub fn enstrophy(&self, c: &[f64]) -> f64 {
        c.iter().map(|v| v * v).sum()
    }

    /// `‖w‖²_{W^{1,2}_0} = Σ σ_k² c_k²`.
    pub fn grad_sq(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(&self.sigmas)
            .map(|(c, s)| (s * c).powi(2))
            .sum()
    }

    /// Velocity coefficients `v_k = −c_k / σ_k` over the `α = 2` Stokes modes.
    pub fn velocity_coeffs(&self, c: &[f64]) -> Vec<f64> {
        c.iter().zip(&self.sigmas).map(|(c, s)| -c / s).collect()
    }

    /// Inverse of [`velocity_coeffs`](Self::velocity_coeffs).
    pub fn vorticity_coeffs(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.sigmas).map(|(v, s)| -v * s).collect()
    }

    pub fn velocity_l2_sq(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(&self.sigmas)
            .map(|(c, s)| (c / s).powi(2))
            .sum()
    }

    pub fn velocity_h1_sq(&self, c: &[f64]) -> f64 {
        quadratic_form(&self.velocity_h1_gram, &self.velocity_coeffs(c))
    }

    /// Biot–Savart: `Δψ = w`, `ψ = 0` on the rim, `u = ∇^⊥ψ`.
    pub fn velocity_from_vorticity(&self, w: &ScalarField) -> Result<VectorField> {
        let c = self.basis.analyze(w)?;
        self.velocity_basis.synthesize(&self.velocity_coeffs(&c))
    }

    /// Vorticity coefficients of the velocity initial condition `ic`.
    pub fn initial(&self, ic: &crate::galerkin::InitialCondition) -> Result<Vec<f64>> {
        let v = initial_coefficients(ic, self.n_modes(), &self.velocity_h1_gram)?;
        Ok(self.vorticity_coeffs(&v))
    }
}

/// One output row of a vorticity trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VorticityRow {
    pub t: f64,
    pub enstrophy: f64,
    pub grad_sq: f64,
    /// `‖w_t‖² + 2ν∫‖w‖²_{W^{1,2}_0} − ‖w₀‖²`.
    pub enstrophy_defect: f64,
    pub u_l2_sq: f64,
    pub u_h1_sq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VorticityState {
    pub t: f64,
    pub step: usize,
    pub c: Vec<f64>,
    pub enstrophy_0: f64,
    /// `∫ ‖w‖²_{W^{1,2}_0} ds` (trapezoid).
    pub int_grad_sq: f64,
    last_grad_sq: f64,
}

impl VorticityState {
    pub fn new(model: &VorticityModel, c: Vec<f64>) -> Self {
        Self {
            t: 0.0,
            step: 0,
            enstrophy_0: model.enstrophy(&c),
            int_grad_sq: 0.0,
            last_grad_sq: model.grad_sq(&c),
            c,
        }
    }

    pub fn enstrophy_defect(&self, model: &VorticityModel, nu: f64) -> f64 {
        model.enstrophy(&self.c) + 2.0 * nu * self.int_grad_sq - self.enstrophy_0
    }

    pub fn row(&self, model: &VorticityModel, nu: f64) -> VorticityRow {
        VorticityRow {
            t: self.t,
            enstrophy: model.enstrophy(&self.c),
            grad_sq: self.last_grad_sq,
            enstrophy_defect: self.enstrophy_defect(model, nu),
            u_l2_sq: model.velocity_l2_sq(&self.c),
            u_h1_sq: model.velocity_h1_sq(&self.c),
        }
    }

    pub fn advance(
        &mut self,
        model: &VorticityModel,
        cfg: &SimConfig,
        dw: &[f64],
        dt: f64,
    ) -> Result<()> {
        let next = model.step(&self.c, dw, dt, cfg);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                t: self.t + dt,
                step: self.step + 1,
                path: None,
            });
        }
        let g = model.grad_sq(&next);
        self.int_grad_sq += 0.5 * dt * (self.last_grad_sq + g);
        self.last_grad_sq = g;
        self.c = next;
        self.step += 1;
        self.t = self.step as f64 * dt;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VorticityOutput {
    pub rows: Vec<VorticityRow>,
    /// Velocity coefficients after every step, initial state first.
    pub velocity: Vec<Vec<f64>>,
    pub final_state: VorticityState,
}

impl VorticityOutput {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,enstrophy,grad_sq,enstrophy_defect,u_l2_sq,u_h1_sq")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.enstrophy, r.grad_sq, r.enstrophy_defect, r.u_l2_sq, r.u_h1_sq
            )?;
        }
        Ok(())
    }
}

fn check_alpha(cfg: &SimConfig) -> Result<()> {
    if cfg.alpha != 2.0 {
        return Err(Error::InvalidArgument(format!(
            "the vorticity form is the free boundary case alpha = 2, got {}",
            cfg.alpha
        )));
    }
    Ok(())
}

/// Integrates the vorticity system along `path`.
pub fn run_vorticity(
    model: &VorticityModel,
    cfg: &SimConfig,
    c0: Vec<f64>,
    path: &BrownianPath,
) -> Result<VorticityOutput> {
    check_alpha(cfg)?;
    if path.m != model.n_noise() {
        return Err(Error::InvalidArgument(format!(
            "path drives {} motions but the model has {} noise fields",
            path.m,
            model.n_noise()
        )));
    }
    let mut state = VorticityState::new(model, c0);
    let mut rows = vec![state.row(model, cfg.nu)];
    let mut velocity = vec![model.velocity_coeffs(&state.c)];
    for s in 0..path.n_steps {
        state.advance(model, cfg, path.step(s), path.dt)?;
        rows.push(state.row(model, cfg.nu));
        velocity.push(model.velocity_coeffs(&state.c));
    }
    Ok(VorticityOutput {
        rows,
        velocity,
        final_state: state,
    })
}

/// Runs one vorticity trajectory with the path drawn from `cfg.seed`.
pub fn run_vorticity_trajectory(
    model: &VorticityModel,
    cfg: &SimConfig,
) -> Result<VorticityOutput> {
    cfg.validate()?;
    let path = sample_path(cfg.seed, cfg.n_steps(), cfg.dt, model.n_noise());
    run_vorticity(model, cfg, model.initial(&cfg.ic)?, &path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub nu: f64,
    /// `sup_t ‖u^ν − u^{ν_next}‖`; `None` for the last entry.
    pub sup_l2_diff_to_next: Option<f64>,
    pub sup_h1_norm: f64,
    pub enstrophy_defect_t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nu,sup_l2_diff_to_next,sup_h1_norm,enstrophy_defect_T")?;
        for e in &self.entries {
            let diff = e
                .sup_l2_diff_to_next
                .map(|d| format!("{d:.16e}"))
                .unwrap_or_default();
            writeln!(
                w,
                "{:.16e},{},{:.16e},{:.16e}",
                e.nu, diff, e.sup_h1_norm, e.enstrophy_defect_t
            )?;
        }
        Ok(())
    }

    /// Consecutive sup-differences, in sweep order.
    pub fn differences(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.sup_l2_diff_to_next)
            .collect()
    }

    /// `(max − min) / max` of the per-ν `sup_t ‖u‖₁`.
    pub fn h1_spread(&self) -> f64 {
        let v: Vec<f64> = self.entries.iter().map(|e| e.sup_h1_norm).collect();
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            (max - min) / max
        } else {
            0.0
        }
    }
}

/// Runs every `ν` in `nu_list` from the same initial state along the same
/// path and compares consecutive trajectories.
pub fn viscosity_sweep(
    model: &VorticityModel,
    base: &SimConfig,
    nu_list: &[f64],
    path: &BrownianPath,
) -> Result<SweepReport> {
    check_alpha(base)?;
    if nu_list.is_empty() {
        return Err(Error::InvalidArgument("the viscosity list is empty".into()));
    }
    if let Some(w) = nu_list.windows(2).find(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument(format!(
            "viscosities must not increase: {} is followed by {}",
            w[0], w[1]
        )));
    }
    let c0 = model.initial(&base.ic)?;
    let runs: Vec<VorticityOutput> = nu_list
        .par_iter()
        .map(|&nu| {
            let cfg = SimConfig { nu, ..base.clone() };
            cfg.validate()?;
            run_vorticity(model, &cfg, c0.clone(), path)
        })
        .collect::<Result<_>>()?;
    let entries = runs
        .iter()
        .enumerate()
        .map(|(i, run)| {
            let sup_l2_diff_to_next = runs.get(i + 1).map(|next| {
                run.velocity
                    .iter()
                    .zip(&next.velocity)
                    .map(|(a, b)| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| (x - y).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(0.0, f64::max)
            });
            SweepEntry {
                nu: nu_list[i],
                sup_l2_diff_to_next,
                sup_h1_norm: run
                    .rows
                    .iter()
                    .map(|r| r.u_h1_sq.sqrt())
                    .fold(0.0, f64::max),
                enstrophy_defect_t: run.rows.last().map(|r| r.enstrophy_defect).unwrap_or(0.0),
            }
        })
        .collect();
    Ok(SweepReport { entries })
}
