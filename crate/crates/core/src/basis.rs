//! Stokes eigenbasis of the unit disk under Navier slip.
//!
//! A mode has streamfunction
//!
//! ```text
//! ψ = N (J_n(σ r) − J_n(σ) r^n) T(nθ),   T ∈ {cos, sin},   a = ∇^⊥ψ
//! ```
//!
//! The harmonic correction makes `a·n = 0` on the rim. The slip condition
//! `curl a = (2 − α) a·ι` then reduces to the characteristic equation
//!
//! ```text
//! F(σ) = σ² J_n(σ) + (2 − α)(σ J_n'(σ) − n J_n(σ)) = 0
//! ```
//!
//! and `−𝒫Δa = σ² a`, since the Laplacian of the harmonic part is a
//! gradient. For `α = 2` the roots are the zeros of `J_n`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::bessel::{bessel_j_orders, derivative_from_orders, second_derivative_from_orders};
use crate::error::{Error, Result};
use crate::field::{polar_to_cartesian, VectorField, VectorJet};
use crate::grid::DiskGrid;

const SCAN_STEP: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        }
    }

    /// `[T, T', T'']` of `T(nθ)` with respect to `θ`.
    pub fn trig(self, n: u32, theta: f64) -> [f64; 3] {
        let nf = n as f64;
        let (s, c) = (nf * theta).sin_cos();
        match self {
            Parity::Cos => [c, -nf * s, -nf * nf * c],
            Parity::Sin => [s, nf * c, -nf * nf * s],
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cos" => Ok(Parity::Cos),
            "sin" => Ok(Parity::Sin),
            other => Err(Error::InvalidArgument(format!("unknown parity '{other}'"))),
        }
    }
}

/// Identifies a mode by angular order, parity and radial index (from 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeId {
    pub n: u32,
    pub parity: Parity,
    pub k: u32,
}

/// `F(σ)` for angular order `n` and slip `α`.
pub fn characteristic(n: u32, alpha: f64, sigma: f64) -> f64 {
    let j = bessel_j_orders(n as usize + 1, sigma);
    let jn = j[n as usize];
    let jp = derivative_from_orders(n as usize, &j);
    sigma * sigma * jn + (2.0 - alpha) * (sigma * jp - n as f64 * jn)
}

fn root_tolerance(n: u32, alpha: f64, sigma: f64) -> f64 {
    1e-12 * (1.0 + sigma * sigma + (2.0 - alpha).abs() * (sigma + n as f64))
}

fn check_slip(n: u32, alpha: f64) -> Result<()> {
    if 2.0 * n as f64 + alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} gives a negative Stokes eigenvalue at angular order {n}"
        )));
    }
    Ok(())
}

fn scan_start(n: u32, alpha: f64) -> f64 {
    // For α ≥ 0 no root lies below n/4.
    if alpha >= 0.0 {
        (0.25 * n as f64).max(1e-3)
    } else {
        1e-3
    }
}

fn refine_root(n: u32, alpha: f64, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = characteristic(n, alpha, mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (characteristic(n, alpha, lo), characteristic(n, alpha, hi));
    let root = if flo.abs() <= fhi.abs() { lo } else { hi };
    let resid = flo.abs().min(fhi.abs());
    if resid > root_tolerance(n, alpha, root) || hi - lo > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "root near sigma = {root} for n = {n} did not converge (|F| = {resid:e})"
        )));
    }
    Ok(root)
}

/// All roots of `F` in `(0, bound)`, ascending.
pub fn sigmas_below(n: u32, alpha: f64, bound: f64) -> Result<Vec<f64>> {
    check_slip(n, alpha)?;
    let mut roots = Vec::new();
    let mut a = scan_start(n, alpha);
    let mut fa = characteristic(n, alpha, a);
    while a < bound {
        let b = (a + SCAN_STEP).min(bound);
        let fb = characteristic(n, alpha, b);
        if fb == 0.0 {
            roots.push(b);
        } else if fa != 0.0 && (fa > 0.0) != (fb > 0.0) {
            roots.push(refine_root(n, alpha, a, b, fa)?);
        }
        a = b;
        fa = fb;
    }
    Ok(roots)
}

/// The first `count` positive roots of `F`, ascending.
///
/// For `2n + α = 0` the characteristic function also vanishes at `σ = 0`
/// (a rigid rotation with zero eigenvalue); that root is never returned.
pub fn find_sigmas(n: u32, alpha: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    check_slip(n, alpha)?;
    if 2.0 * n as f64 + alpha == 0.0 {
        log::debug!("degenerate root sigma = 0 at n = {n}, alpha = {alpha} excluded");
    }
    let ceiling = 1.5 * n as f64 + PI * (count as f64 + 2.0) + 10.0;
    let roots = sigmas_below(n, alpha, ceiling)?;
    if roots.len() < count {
        return Err(Error::RootBracketing {
            n,
            requested: count,
            found: roots.len(),
            ceiling,
        });
    }
    Ok(roots[..count].to_vec())
}

/// Squared L² norm of `∇^⊥[(J_n(σr) − J_n(σ) r^n) T(nθ)]`.
pub fn unnormalised_norm_sq(n: u32, sigma: f64) -> f64 {
    let j = bessel_j_orders(n as usize + 1, sigma);
    let nn = n as usize;
    let jn = j[nn];
    let jp = derivative_from_orders(nn, &j);
    let nf = n as f64;
    let angular = if n == 0 { 2.0 * PI } else { PI };
    let radial = 0.5 * (jp * jp + (1.0 - nf * nf / (sigma * sigma)) * jn * jn);
    angular * sigma * sigma * (radial - jn * j[nn + 1] / sigma)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesMode {
    pub n: u32,
    pub parity: Parity,
    pub k: u32,
    pub sigma: f64,
    pub lambda: f64,
    /// `J_n(σ)`, the coefficient removed from the `r^n` harmonic part.
    pub harmonic_coeff: f64,
    pub norm_const: f64,
}

impl StokesMode {
    pub fn new(n: u32, parity: Parity, k: u32, sigma: f64) -> Self {
        let j = bessel_j_orders(n as usize, sigma);
        Self {
            n,
            parity,
            k,
            sigma,
            lambda: sigma * sigma,
            harmonic_coeff: j[n as usize],
            norm_const: 1.0 / unnormalised_norm_sq(n, sigma).sqrt(),
        }
    }

    pub fn id(&self) -> ModeId {
        ModeId {
            n: self.n,
            parity: self.parity,
            k: self.k,
        }
    }

    /// Radial profile `[R, R', R'']` (without the normalisation constant).
    fn radial(&self, r: f64, j: &[f64]) -> [f64; 3] {
        let n = self.n as usize;
        let nf = n as f64;
        let h = self.harmonic_coeff;
        let s = self.sigma;
        let rn = |p: i32| if p < 0 { 0.0 } else { r.powi(p) };
        [
            j[n] - h * rn(n as i32),
            s * derivative_from_orders(n, j) - h * nf * rn(n as i32 - 1),
            s * s * second_derivative_from_orders(n, j) - h * nf * (nf - 1.0) * rn(n as i32 - 2),
        ]
    }

    /// Streamfunction polar derivatives `[ψ, ψ_r, ψ_θ, ψ_rr, ψ_rθ, ψ_θθ]`.
    pub fn stream_polar(&self, r: f64, theta: f64) -> [f64; 6] {
        let j = bessel_j_orders(self.n as usize + 2, self.sigma * r);
        let rad = self.radial(r, &j);
        let t = self.parity.trig(self.n, theta);
        let nc = self.norm_const;
        [
            nc * rad[0] * t[0],
            nc * rad[1] * t[0],
            nc * rad[0] * t[1],
            nc * rad[2] * t[0],
            nc * rad[1] * t[1],
            nc * rad[0] * t[2],
        ]
    }

    /// Velocity and gradient `(a, ∂_a a^b)` at `(x, y)`; `(x, y) ≠ 0`.
    pub fn jet_at(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let r = x.hypot(y).max(1e-14);
        let theta = y.atan2(x);
        let p = self.stream_polar(r, theta);
        stream_to_velocity(r, theta.cos(), theta.sin(), [p[1], p[2], p[3], p[4], p[5]])
    }

    pub fn velocity_at(&self, x: f64, y: f64) -> [f64; 2] {
        self.jet_at(x, y).0
    }

    /// `curl a = Δψ = −σ² N J_n(σr) T(nθ)`.
    pub fn vorticity_polar(&self, r: f64, theta: f64) -> f64 {
        let j = bessel_j_orders(self.n as usize, self.sigma * r);
        -self.lambda * self.norm_const * j[self.n as usize] * self.parity.trig(self.n, theta)[0]
    }

    /// `a·ι` on the rim.
    pub fn rim_tangential(&self, theta: f64) -> f64 {
        let j = bessel_j_orders(self.n as usize + 1, self.sigma);
        let n = self.n as usize;
        let slope = self.sigma * derivative_from_orders(n, &j) - n as f64 * j[n];
        self.norm_const * slope * self.parity.trig(self.n, theta)[0]
    }
}

fn stream_to_velocity(r: f64, c: f64, s: f64, d: [f64; 5]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (g, h) = polar_to_cartesian(r, c, s, d);
    let [px, py] = g;
    let [pxx, pxy, pyy] = h;
    ([-py, px], [[-pxy, -pyy], [pxx, pxy]])
}

fn mode_order(a: &StokesMode, b: &StokesMode) -> std::cmp::Ordering {
    a.lambda
        .total_cmp(&b.lambda)
        .then(a.n.cmp(&b.n))
        .then(a.parity.cmp(&b.parity))
        .then(a.k.cmp(&b.k))
}

/// Result of enumerating the lowest part of the spectrum.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub alpha: f64,
    pub modes: Vec<StokesMode>,
    /// Set when `α = 0`: the rigid rotation (σ = 0) was left out.
    pub degenerate_excluded: bool,
}

/// The `n_modes` smallest Stokes eigenpairs, ordered by `λ`, then
/// `(n, cos before sin, k)`.
pub fn stokes_spectrum(alpha: f64, n_modes: usize) -> Result<Spectrum> {
    if n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} is not finite"
        )));
    }
    check_slip(0, alpha)?;
    let mut bound = 2.4 * (n_modes as f64).sqrt() + 6.0;
    loop {
        let orders: Vec<u32> = (0..)
            .take_while(|&n| scan_start(n, alpha) < bound)
            .collect();
        let per_order: Vec<Vec<f64>> = orders
            .par_iter()
            .map(|&n| sigmas_below(n, alpha, bound))
            .collect::<Result<_>>()?;
        let mut modes = Vec::new();
        for (&n, roots) in orders.iter().zip(&per_order) {
            for (k, &sigma) in roots.iter().enumerate() {
                let k = k as u32 + 1;
                modes.push(StokesMode::new(n, Parity::Cos, k, sigma));
                if n > 0 {
                    let mut m = *modes.last().unwrap();
                    m.parity = Parity::Sin;
                    modes.push(m);
                }
            }
        }
        if modes.len() >= n_modes {
            modes.sort_by(mode_order);
            modes.truncate(n_modes);
            let degenerate_excluded = alpha == 0.0;
            if degenerate_excluded {
                log::warn!("alpha = 0 admits a rigid rotation with eigenvalue 0; it is excluded");
            }
            return Ok(Spectrum {
                alpha,
                modes,
                degenerate_excluded,
            });
        }
        bound *= 1.5;
    }
}

/// Writes the spectrum table with a header row.
pub fn write_spectrum_csv<W: Write>(mut w: W, modes: &[StokesMode]) -> Result<()> {
    writeln!(w, "n,parity,k,sigma,lambda,harmonic_coeff,norm_const")?;
    for m in modes {
        writeln!(
            w,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            m.n, m.parity, m.k, m.sigma, m.lambda, m.harmonic_coeff, m.norm_const
        )?;
    }
    Ok(())
}

/// A truncated Stokes basis sampled on a grid.
#[derive(Debug)]
pub struct BasisSet {
    alpha: f64,
    modes: Vec<StokesMode>,
    grid: Arc<DiskGrid>,
    samples: Vec<VectorField>,
    jets: OnceLock<Vec<VectorJet>>,
    pub below_curvature: bool,
    pub degenerate_excluded: bool,
}

impl BasisSet {
    /// The `n_modes` lowest modes for slip `alpha`.
    pub fn build(alpha: f64, n_modes: usize, grid: Arc<DiskGrid>) -> Result<Self> {
        let table = stokes_spectrum(alpha, n_modes)?;
        let mut basis = Self::from_modes(alpha, table.modes, grid)?;
        basis.degenerate_excluded = table.degenerate_excluded;
        Ok(basis)
    }

    /// A basis made of explicitly requested modes, reordered by eigenvalue.
    pub fn from_requests(alpha: f64, ids: &[ModeId], grid: Arc<DiskGrid>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one mode must be requested".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for id in ids {
            if id.n == 0 && id.parity == Parity::Sin {
                return Err(Error::InvalidArgument("sine modes need n >= 1".into()));
            }
            if id.k == 0 {
                return Err(Error::InvalidArgument("radial index k starts at 1".into()));
            }
            if !seen.insert(*id) {
                return Err(Error::DuplicateMode {
                    n: id.n,
                    parity: id.parity.label(),
                    k: id.k,
                });
            }
        }
        let modes = ids
            .iter()
            .map(|id| {
                let sigmas = find_sigmas(id.n, alpha, id.k as usize)?;
                Ok(StokesMode::new(
                    id.n,
                    id.parity,
                    id.k,
                    sigmas[id.k as usize - 1],
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_modes(alpha, modes, grid)
    }

    fn from_modes(alpha: f64, mut modes: Vec<StokesMode>, grid: Arc<DiskGrid>) -> Result<Self> {
        modes.sort_by(mode_order);
        let max_n = modes.iter().map(|m| m.n).max().unwrap_or(0) as usize;
        let max_k = modes.iter().map(|m| m.k).max().unwrap_or(1) as usize;
        if grid.n_theta() < 2 * max_n + 2 {
            return Err(Error::GridTooCoarse(format!(
                "n_theta = {} cannot resolve angular order {max_n} (need at least {})",
                grid.n_theta(),
                2 * max_n + 2
            )));
        }
        if grid.n_r() < 2 * max_k {
            return Err(Error::GridTooCoarse(format!(
                "n_r = {} cannot resolve radial index {max_k} (need at least {})",
                grid.n_r(),
                2 * max_k
            )));
        }
        let samples: Vec<VectorField> = modes
            .par_iter()
            .map(|m| sample_mode(&grid, m, false).value)
            .collect();
        for (m, s) in modes.iter().zip(&samples) {
            let q = grid.integrate_product(&s.u1, &s.u1) + grid.integrate_product(&s.u2, &s.u2);
            if (q - 1.0).abs() > 1e-6 {
                return Err(Error::GridTooCoarse(format!(
                    "mode (n = {}, {}, k = {}) has quadrature norm² {q}, off by {:e}",
                    m.n,
                    m.parity,
                    m.k,
                    (q - 1.0).abs()
                )));
            }
        }
        let below_curvature = alpha < 1.0;
        if below_curvature {
            log::warn!("alpha = {alpha} is below the boundary curvature; strong solutions are not guaranteed");
        }
        Ok(Self {
            alpha,
            modes,
            grid,
            samples,
            jets: OnceLock::new(),
            below_curvature,
            degenerate_excluded: false,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[StokesMode] {
        &self.modes
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn sample(&self, k: usize) -> &VectorField {
        &self.samples[k]
    }

    /// Mode samples with their analytic gradients.
    pub fn jets(&self) -> &[VectorJet] {
        self.jets.get_or_init(|| {
            self.modes
                .par_iter()
                .map(|m| sample_mode(&self.grid, m, true))
                .collect()
        })
    }

    /// `c_k = ⟨f, a_k⟩`.
    pub fn analyze(&self, f: &VectorField) -> Result<Vec<f64>> {
        f.check(&self.grid)?;
        Ok(self
            .samples
            .iter()
            .map(|a| {
                self.grid.integrate_product(&f.u1, &a.u1)
                    + self.grid.integrate_product(&f.u2, &a.u2)
            })
            .collect())
    }

    /// `Σ c_k a_k`; shorter coefficient vectors are zero-extended.
    pub fn synthesize(&self, c: &[f64]) -> Result<VectorField> {
        if c.len() > self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                found: c.len(),
            });
        }
        let mut out = VectorField::zeros(&self.grid);
        for (ck, a) in c.iter().zip(&self.samples) {
            if *ck != 0.0 {
                out.axpy(*ck, a);
            }
        }
        Ok(out)
    }

    /// `Σ c_k a_k` together with its gradient.
    pub fn synthesize_jet(&self, c: &[f64]) -> Result<VectorJet> {
        if c.len() > self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                found: c.len(),
            });
        }
        let mut out = VectorJet::zeros(&self.grid);
        for (ck, a) in c.iter().zip(self.jets()) {
            if *ck == 0.0 {
                continue;
            }
            out.value.axpy(*ck, &a.value);
            for b in 0..2 {
                for d in 0..2 {
                    for (o, v) in out.grad[b][d].iter_mut().zip(&a.grad[b][d]) {
                        *o += ck * v;
                    }
                }
            }
        }
        Ok(out)
    }
}

fn sample_mode(grid: &DiskGrid, m: &StokesMode, with_grad: bool) -> VectorJet {
    let nt = grid.n_theta();
    let trig: Vec<[f64; 3]> = grid
        .angles()
        .iter()
        .map(|&t| m.parity.trig(m.n, t))
        .collect();
    let mut jet = VectorJet::zeros(grid);
    for (i, &r) in grid.radii().iter().enumerate() {
        let j = bessel_j_orders(m.n as usize + 2, m.sigma * r);
        let rad = m.radial(r, &j);
        for (jj, t) in trig.iter().enumerate() {
            let p = i * nt + jj;
            let d = [
                rad[1] * t[0],
                rad[0] * t[1],
                rad[2] * t[0],
                rad[1] * t[1],
                rad[0] * t[2],
            ];
            let (c, s) = (grid.cos_theta()[jj], grid.sin_theta()[jj]);
            if with_grad {
                let (v, g) = stream_to_velocity(r, c, s, d);
                jet.value.u1[p] = v[0];
                jet.value.u2[p] = v[1];
                for b in 0..2 {
                    for a in 0..2 {
                        jet.grad[b][a][p] = g[b][a];
                    }
                }
            } else {
                // u = (−ψ_y, ψ_x) only needs first derivatives
                let (fr, ft) = (d[0], d[1]);
                jet.value.u1[p] = -(s * fr + c / r * ft);
                jet.value.u2[p] = c * fr - s / r * ft;
            }
        }
    }
    jet.scale(m.norm_const);
    jet
}
