//! Finite-difference reference implementations on a polar grid.
//!
//! Everything here is deliberately simple (uniform stencils, naive DFT,
//! dense eigensolves) and shares no numerics with the spectral path, so it
//! can be used to check it. Radial nodes sit at `r_i = (i + ½) h_r`, which
//! keeps `r = 0` off the grid.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Uniform polar grid with a half-cell radial offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub h_r: f64,
    pub h_theta: f64,
}

impl FdGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 16 || n_theta < 16 || !n_theta.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "FD grid needs n_r, n_theta >= 16 and n_theta even, got {n_r}x{n_theta}"
            )));
        }
        Ok(Self {
            n_r,
            n_theta,
            h_r: 1.0 / n_r as f64,
            h_theta: 2.0 * PI / n_theta as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h_r
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_theta
    }

    /// Samples `f(x, y)` at the nodes, radial index outer.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_r {
            let r = self.r(i);
            for j in 0..self.n_theta {
                let t = self.theta(j);
                out.push(f(r * t.cos(), r * t.sin()));
            }
        }
        out
    }

    /// Midpoint-rule area integral.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n_r {
            let r = self.r(i);
            s += r * f[i * self.n_theta..(i + 1) * self.n_theta]
                .iter()
                .sum::<f64>();
        }
        s * self.h_r * self.h_theta
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                found: f.len(),
            });
        }
        Ok(())
    }
}

const C4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];

/// Fourth-order one-sided first derivative from five samples `f_0..f_4`
/// at unit spacing, evaluated at sample `at`.
fn one_sided(f: [f64; 5], at: usize) -> f64 {
    const W: [[f64; 5]; 5] = [
        [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0],
        [-1.0 / 4.0, -5.0 / 6.0, 3.0 / 2.0, -1.0 / 2.0, 1.0 / 12.0],
        [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        [-1.0 / 12.0, 1.0 / 2.0, -3.0 / 2.0, 5.0 / 6.0, 1.0 / 4.0],
        [1.0 / 4.0, -4.0 / 3.0, 3.0, -4.0, 25.0 / 12.0],
    ];
    W[at].iter().zip(f).map(|(w, v)| w * v).sum()
}

/// `(∂₁f, ∂₂f)` by fourth-order polar differences. Radial stencils reach
/// across the origin through `f(−r, θ) = f(r, θ + π)` and turn one-sided at
/// the rim.
pub fn fd_derivatives(f: &[f64], grid: &FdGrid) -> Result<[Vec<f64>; 2]> {
    grid.check(f)?;
    let (nr, nt) = (grid.n_r, grid.n_theta);
    let at = |i: isize, j: usize| -> f64 {
        if i < 0 {
            f[(-i - 1) as usize * nt + (j + nt / 2) % nt]
        } else {
            f[i as usize * nt + j]
        }
    };
    let mut d1 = vec![0.0; grid.len()];
    let mut d2 = vec![0.0; grid.len()];
    for i in 0..nr {
        let r = grid.r(i);
        for j in 0..nt {
            let ii = i as isize;
            let fr = if i + 2 < nr {
                (C4[0] * (at(ii + 1, j) - at(ii - 1, j)) + C4[1] * (at(ii + 2, j) - at(ii - 2, j)))
                    / grid.h_r
            } else {
                let base = nr as isize - 5;
                let s = [0, 1, 2, 3, 4].map(|k| at(base + k, j));
                one_sided(s, (ii - base) as usize) / grid.h_r
            };
            let jp = |k: usize| (j + k) % nt;
            let jm = |k: usize| (j + nt - k) % nt;
            let ft = (C4[0] * (f[i * nt + jp(1)] - f[i * nt + jm(1)])
                + C4[1] * (f[i * nt + jp(2)] - f[i * nt + jm(2)]))
                / grid.h_theta;
            let (c, s) = (grid.theta(j).cos(), grid.theta(j).sin());
            d1[i * nt + j] = c * fr - s / r * ft;
            d2[i * nt + j] = s * fr + c / r * ft;
        }
    }
    Ok([d1, d2])
}

/// Polar fourth-order derivatives of `f` at `(r, θ)` with spacings `(h_r, h_θ)`.
fn point_derivatives(f: &dyn Fn(f64, f64) -> f64, r: f64, t: f64, hr: f64, ht: f64) -> [f64; 2] {
    let p = |rr: f64, tt: f64| f(rr * tt.cos(), rr * tt.sin());
    let fr = (C4[0] * (p(r + hr, t) - p(r - hr, t))
        + C4[1] * (p(r + 2.0 * hr, t) - p(r - 2.0 * hr, t)))
        / hr;
    let ft = (C4[0] * (p(r, t + ht) - p(r, t - ht))
        + C4[1] * (p(r, t + 2.0 * ht) - p(r, t - 2.0 * ht)))
        / ht;
    let (c, s) = (t.cos(), t.sin());
    [c * fr - s / r * ft, s * fr + c / r * ft]
}

/// `(∂₁f, ∂₂f)` at the nodes from stencils of spacing `h` and `h/2` on a
/// closed-form `f`, combined by Richardson extrapolation (error `O(h⁶)`).
/// Stencils may leave the disk, so `f` must be defined on the plane.
pub fn fd_derivatives_extrapolated(f: &dyn Fn(f64, f64) -> f64, grid: &FdGrid) -> [Vec<f64>; 2] {
    let mut d1 = Vec::with_capacity(grid.len());
    let mut d2 = Vec::with_capacity(grid.len());
    for i in 0..grid.n_r {
        let r = grid.r(i);
        for j in 0..grid.n_theta {
            let t = grid.theta(j);
            let coarse = point_derivatives(f, r, t, grid.h_r, grid.h_theta);
            let fine = point_derivatives(f, r, t, 0.5 * grid.h_r, 0.5 * grid.h_theta);
            d1.push((16.0 * fine[0] - coarse[0]) / 15.0);
            d2.push((16.0 * fine[1] - coarse[1]) / 15.0);
        }
    }
    [d1, d2]
}

/// Unextrapolated counterpart of [`fd_derivatives_extrapolated`].
pub fn fd_derivatives_pointwise(f: &dyn Fn(f64, f64) -> f64, grid: &FdGrid) -> [Vec<f64>; 2] {
    let mut d1 = Vec::with_capacity(grid.len());
    let mut d2 = Vec::with_capacity(grid.len());
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            let d = point_derivatives(f, grid.r(i), grid.theta(j), grid.h_r, grid.h_theta);
            d1.push(d[0]);
            d2.push(d[1]);
        }
    }
    [d1, d2]
}

fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Second-order five-point solve of `Δψ = rhs`, `ψ = 0` at `r = 1`, one
/// tridiagonal system per angular wavenumber of a naive DFT.
pub fn fd_poisson_dirichlet(rhs: &[f64], grid: &FdGrid) -> Result<Vec<f64>> {
    grid.check(rhs)?;
    let (nr, nt, h) = (grid.n_r, grid.n_theta, grid.h_r);
    let mut modes_re = vec![vec![0.0; nr]; nt];
    let mut modes_im = vec![vec![0.0; nr]; nt];
    for i in 0..nr {
        for m in 0..nt {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..nt {
                let a = -(m as f64) * grid.theta(j);
                re += rhs[i * nt + j] * a.cos();
                im += rhs[i * nt + j] * a.sin();
            }
            modes_re[m][i] = re / nt as f64;
            modes_im[m][i] = im / nt as f64;
        }
    }
    let mut out = vec![0.0; grid.len()];
    for m in 0..nt {
        // Symbol of the three-point angular second difference.
        let k2 = (2.0 * (0.5 * m as f64 * grid.h_theta).sin() / grid.h_theta).powi(2);
        let mut lower = vec![0.0; nr];
        let mut diag = vec![0.0; nr];
        let mut upper = vec![0.0; nr];
        for i in 0..nr {
            let r = grid.r(i);
            let (rm, rp) = (r - 0.5 * h, r + 0.5 * h);
            let s = 1.0 / (r * h * h);
            lower[i] = s * rm;
            upper[i] = s * rp;
            diag[i] = -s * (rm + rp) - k2 / (r * r);
        }
        // Dirichlet through the ghost value ψ_n = −ψ_{n−1}.
        diag[nr - 1] -= upper[nr - 1];
        let re = solve_tridiagonal(&lower, &diag, &upper, &modes_re[m]);
        let im = solve_tridiagonal(&lower, &diag, &upper, &modes_im[m]);
        for i in 0..nr {
            for j in 0..nt {
                let a = m as f64 * grid.theta(j);
                out[i * nt + j] += re[i] * a.cos() - im[i] * a.sin();
            }
        }
    }
    Ok(out)
}

/// Splits `f = ∇^⊥ψ + g` with `Δψ = curl f`, `ψ = 0` on the rim; returns
/// `(∇^⊥ψ, g)` as component pairs.
pub fn fd_helmholtz_decompose(
    f: &[Vec<f64>; 2],
    grid: &FdGrid,
) -> Result<([Vec<f64>; 2], [Vec<f64>; 2])> {
    let [_, d2u1] = fd_derivatives(&f[0], grid)?;
    let [d1u2, _] = fd_derivatives(&f[1], grid)?;
    let curl: Vec<f64> = d1u2.iter().zip(&d2u1).map(|(a, b)| a - b).collect();
    let psi = fd_poisson_dirichlet(&curl, grid)?;
    let [px, py] = fd_derivatives(&psi, grid)?;
    let sol = [py.iter().map(|v| -v).collect::<Vec<f64>>(), px];
    let grad = [
        f[0].iter().zip(&sol[0]).map(|(a, b)| a - b).collect(),
        f[1].iter().zip(&sol[1]).map(|(a, b)| a - b).collect(),
    ];
    Ok((sol, grad))
}

/// Subsamples a field on the grid refined threefold in both directions back
/// to `grid`; radial node `i` of `grid` is node `3i + 1` of the fine grid.
pub fn restrict_threefold(fine: &[f64], grid: &FdGrid) -> Vec<f64> {
    let nt_fine = 3 * grid.n_theta;
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            out.push(fine[(3 * i + 1) * nt_fine + 3 * j]);
        }
    }
    out
}

/// Richardson combination of a second-order result on `grid` and on the
/// threefold refinement, sampled at the nodes of `grid`.
pub fn richardson_threefold(coarse: &[f64], fine: &[f64], grid: &FdGrid) -> Vec<f64> {
    restrict_threefold(fine, grid)
        .iter()
        .zip(coarse)
        .map(|(f, c)| (9.0 * f - c) / 8.0)
        .collect()
}

/// Radial operator `ψ'' + ψ'/r − n²ψ/r²` on the half-offset nodes with the
/// Dirichlet ghost `ψ_N = −ψ_{N−1}`.
fn radial_laplacian(n: u32, n_r: usize) -> DMatrix<f64> {
    let h = 1.0 / n_r as f64;
    let nn = (n as f64).powi(2);
    let mut a = DMatrix::zeros(n_r, n_r);
    for i in 0..n_r {
        let r = (i as f64 + 0.5) * h;
        let (rm, rp) = (r - 0.5 * h, r + 0.5 * h);
        let s = 1.0 / (r * h * h);
        a[(i, i)] = -s * (rm + rp) - nn / (r * r);
        if i > 0 {
            a[(i, i - 1)] = s * rm;
        }
        if i + 1 < n_r {
            a[(i, i + 1)] = s * rp;
        } else {
            a[(i, i)] -= s * rp;
        }
    }
    a
}

fn stokes_eigs_raw(alpha: f64, n: u32, n_r: usize) -> Result<Vec<f64>> {
    let h = 1.0 / n_r as f64;
    let a = radial_laplacian(n, n_r);
    // w = Aψ and L w = −λ w, where w's ghost carries the slip condition
    // w(1) = (2 − α) ψ'(1) with ψ'(1) ≈ −2ψ_{N−1}/h.
    let r_last = (n_r as f64 - 0.5) * h;
    let c_plus = (r_last + 0.5 * h) / (r_last * h * h);
    let mut lhs = &a * &a;
    lhs[(n_r - 1, n_r - 1)] += c_plus * (-4.0 * (2.0 - alpha) / h);
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Solver("singular FD Laplacian".into()))?;
    let m = -(inv * lhs);
    let mut eig: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.re > 0.0 && z.im.abs() <= 1e-8 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Smallest Stokes eigenvalues for angular order `n` from the streamfunction
/// problem `Δ²ψ = −λΔψ`, `ψ(1) = 0`, `Δψ(1) = (2 − α)ψ_r(1)`.
///
/// Eigenvalues without a partner within 1% on the half-resolution grid are
/// treated as spurious and dropped.
pub fn fd_stokes_eigs(alpha: f64, n: u32, n_r: usize, count: usize) -> Result<Vec<f64>> {
    if n_r < 32 {
        return Err(Error::InvalidArgument(format!(
            "n_r = {n_r} is too coarse for the eigen-solve"
        )));
    }
    let fine = stokes_eigs_raw(alpha, n, n_r)?;
    let coarse = stokes_eigs_raw(alpha, n, n_r / 2)?;
    let kept: Vec<f64> = fine
        .into_iter()
        .filter(|l| coarse.iter().any(|c| (c - l).abs() <= 1e-2 * l))
        .take(count)
        .collect();
    if kept.len() < count {
        return Err(Error::Solver(format!(
            "only {} converged eigenvalues for n = {n}, alpha = {alpha}",
            kept.len()
        )));
    }
    Ok(kept)
}

/// `J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ` by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_integral(n: u32, x: f64) -> f64 {
    let m = 64 + 2 * (x.abs().ceil() as usize) + 2 * n as usize;
    let h = PI / m as f64;
    let g = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = 0.5 * (g(0.0) + g(PI));
    for k in 1..m {
        s += g(k as f64 * h);
    }
    s * h / PI
}

/// Roots of `J_n` below `bound` by scanning and bisection on
/// [`bessel_integral`].
pub fn bessel_zeros(n: u32, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let step = 0.05;
    let mut a = n as f64 + 0.5;
    let mut fa = bessel_integral(n, a);
    while out.len() < count {
        let b = a + step;
        let fb = bessel_integral(n, b);
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = bessel_integral(n, mid);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * hi {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    out
}

/// Least-squares slope of `log₂ err` against the halving index; the observed
/// convergence order when `errs` follow successive halvings.
pub fn observed_order(errs: &[f64]) -> f64 {
    let n = errs.len() as f64;
    let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    -sxy / sxx
}

/// Outcome of one convergence-order study.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderCheck {
    pub name: &'static str,
    pub designed: f64,
    pub observed: f64,
    pub errors: Vec<f64>,
}

impl OrderCheck {
    fn new(name: &'static str, designed: f64, errors: Vec<f64>) -> Self {
        Self {
            name,
            designed,
            observed: observed_order(&errors),
            errors,
        }
    }

    /// Observed order within `±0.3` of the designed one.
    pub fn passed(&self) -> bool {
        (self.observed - self.designed).abs() <= 0.3
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn smooth_test_field(x: f64, y: f64) -> f64 {
    x.exp() * (2.0 * y).sin() + 0.5 * (x * y).cos()
}

fn smooth_test_gradient(x: f64, y: f64) -> [f64; 2] {
    [
        x.exp() * (2.0 * y).sin() - 0.5 * y * (x * y).sin(),
        2.0 * x.exp() * (2.0 * y).cos() - 0.5 * x * (x * y).sin(),
    ]
}

fn derivative_errors(grid: &FdGrid, d: &[Vec<f64>; 2]) -> f64 {
    let e1 = grid.sample(|x, y| smooth_test_gradient(x, y)[0]);
    let e2 = grid.sample(|x, y| smooth_test_gradient(x, y)[1]);
    max_abs_diff(&d[0], &e1).max(max_abs_diff(&d[1], &e2))
}

/// Grid-sampled fourth-order derivatives on `n_r = 16, 32, 64`.
pub fn check_derivatives() -> Result<OrderCheck> {
    let mut errs = Vec::new();
    for n in [16, 32, 64] {
        let g = FdGrid::new(n, 2 * n)?;
        errs.push(derivative_errors(
            &g,
            &fd_derivatives(&g.sample(smooth_test_field), &g)?,
        ));
    }
    Ok(OrderCheck::new("fd_derivatives", 4.0, errs))
}

/// Extrapolated derivatives of a closed-form field on `n_r = 32, 64, 128`.
pub fn check_derivatives_extrapolated() -> Result<OrderCheck> {
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let g = FdGrid::new(n, 2 * n)?;
        errs.push(derivative_errors(
            &g,
            &fd_derivatives_extrapolated(&smooth_test_field, &g),
        ));
    }
    Ok(OrderCheck::new("fd_derivatives_extrapolated", 6.0, errs))
}

/// `Δψ = −σ²ψ` for `ψ = J_2(σr) cos 2θ`, `J_2(σ) = 0`.
pub fn check_poisson() -> Result<OrderCheck> {
    let sigma = bessel_zeros(2, 1)[0];
    let psi = |x: f64, y: f64| {
        let r = x.hypot(y);
        let c2 = if r > 0.0 {
            (x * x - y * y) / (r * r)
        } else {
            0.0
        };
        bessel_integral(2, sigma * r) * c2
    };
    let mut errs = Vec::new();
    for n in [16, 32, 64] {
        let g = FdGrid::new(n, n)?;
        let exact = g.sample(psi);
        let rhs: Vec<f64> = exact.iter().map(|v| -sigma * sigma * v).collect();
        errs.push(max_abs_diff(&fd_poisson_dirichlet(&rhs, &g)?, &exact));
    }
    Ok(OrderCheck::new("fd_poisson_dirichlet", 2.0, errs))
}

/// `f = ∇^⊥ψ + ∇g` with `ψ = J_2(σr) sin 2θ` vanishing on the rim; the
/// divergence-free part should reproduce `∇^⊥ψ`.
pub fn check_helmholtz() -> Result<OrderCheck> {
    let sigma = bessel_zeros(2, 1)[0];
    // ψ = J_2(σr)·2xy/r², differentiated in polar form.
    let grad_psi = |x: f64, y: f64| -> [f64; 2] {
        let r = x.hypot(y);
        let (c, s) = (x / r, y / r);
        let j = bessel_integral(2, sigma * r);
        let jp = 0.5 * sigma * (bessel_integral(1, sigma * r) - bessel_integral(3, sigma * r));
        let (s2, c2) = (2.0 * s * c, c * c - s * s);
        let (fr, ft) = (jp * s2, 2.0 * j * c2);
        [c * fr - s / r * ft, s * fr + c / r * ft]
    };
    let perp = |x: f64, y: f64| {
        let g = grad_psi(x, y);
        [-g[1], g[0]]
    };
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let g = FdGrid::new(n, n)?;
        let f = [
            g.sample(|x, y| perp(x, y)[0] + 2.0 * x * y + x.cos()),
            g.sample(|x, y| perp(x, y)[1] + x * x + 0.5),
        ];
        let (sol, _) = fd_helmholtz_decompose(&f, &g)?;
        let e0 = g.sample(|x, y| perp(x, y)[0]);
        let e1 = g.sample(|x, y| perp(x, y)[1]);
        errs.push(max_abs_diff(&sol[0], &e0).max(max_abs_diff(&sol[1], &e1)));
    }
    Ok(OrderCheck::new("fd_helmholtz_decompose", 2.0, errs))
}

/// First `α = 2`, `n = 1` eigenvalue against the squared Bessel zero.
pub fn check_stokes_eigs() -> Result<OrderCheck> {
    let exact = bessel_zeros(1, 1)[0].powi(2);
    let mut errs = Vec::new();
    for n_r in [64, 128, 256] {
        errs.push((fd_stokes_eigs(2.0, 1, n_r, 1)?[0] - exact).abs());
    }
    Ok(OrderCheck::new("fd_stokes_eigs", 2.0, errs))
}

/// Every oracle order study.
pub fn order_checks() -> Result<Vec<OrderCheck>> {
    Ok(vec![
        check_derivatives()?,
        check_derivatives_extrapolated()?,
        check_poisson()?,
        check_helmholtz()?,
        check_stokes_eigs()?,
    ])
}
