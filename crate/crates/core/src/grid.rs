//! Polar collocation grid on the unit disk.
//!
//! Radial nodes are Gauss–Legendre points mapped to (0, 1); the angle is
//! sampled uniformly. Neither the centre nor the rim is a node, so every
//! polar formula with `1/r` stays finite. Fields are stored row-major with
//! the radial index outermost: `data[i * n_theta + j] = f(r_i, θ_j)`.
//!
//! Radial derivatives use the barycentric differentiation matrix of the
//! interpolant through all radial nodes. Dirichlet problems use the
//! interpolant through the nodes plus the rim point `r = 1` with the rim
//! value pinned to zero. Angular derivatives and products go through FFTs.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::quadrature::{
    barycentric_row, differentiation_matrix, gauss_legendre, legendre_barycentric_weights, matmul,
};

#[derive(Clone)]
pub struct DiskGrid {
    n_r: usize,
    n_theta: usize,
    r: Vec<f64>,
    area_weights: Vec<f64>,
    theta: Vec<f64>,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
    bary: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d1_dir: Vec<f64>,
    d2_dir: Vec<f64>,
    rim_value: Vec<f64>,
    rim_slope: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    fft_pad: Arc<dyn Fft<f64>>,
    ifft_pad: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiskGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiskGrid")
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish()
    }
}

impl DiskGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 4 {
            return Err(Error::InvalidArgument(format!(
                "n_r = {n_r} is below the minimum of 4"
            )));
        }
        if n_theta < 4 || !n_theta.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "n_theta = {n_theta} must be even and at least 4"
            )));
        }
        let (x, w) = gauss_legendre(n_r);
        let bary = legendre_barycentric_weights(&x, &w);
        let r: Vec<f64> = x.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let dtheta = 2.0 * PI / n_theta as f64;
        let area_weights = r
            .iter()
            .zip(&w)
            .map(|(r, w)| 0.5 * w * r * dtheta)
            .collect();
        let theta: Vec<f64> = (0..n_theta).map(|j| j as f64 * dtheta).collect();
        let cos_t = theta.iter().map(|t| t.cos()).collect();
        let sin_t = theta.iter().map(|t| t.sin()).collect();

        let d1 = differentiation_matrix(&r, &bary);
        let d2 = matmul(&d1, &d1, n_r);

        let mut r_ext = r.clone();
        r_ext.push(1.0);
        let mut bary_ext: Vec<f64> = r.iter().zip(&bary).map(|(r, b)| b / (r - 1.0)).collect();
        bary_ext.push(-bary_ext.iter().sum::<f64>());
        let m = n_r + 1;
        let d1_ext = differentiation_matrix(&r_ext, &bary_ext);
        let d2_ext = matmul(&d1_ext, &d1_ext, m);
        let block = |a: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(n_r * n_r);
            for i in 0..n_r {
                out.extend_from_slice(&a[i * m..i * m + n_r]);
            }
            out
        };
        let d1_dir = block(&d1_ext);
        let d2_dir = block(&d2_ext);

        let rim_value = barycentric_row(&r, &bary, 1.0);
        let rim_slope = (0..n_r)
            .map(|k| d1_ext[n_r * m + k] + d1_ext[n_r * m + n_r] * rim_value[k])
            .collect();

        let mut planner = FftPlanner::new();
        let n_pad = 3 * n_theta / 2;
        Ok(Self {
            n_r,
            n_theta,
            r,
            area_weights,
            theta,
            cos_t,
            sin_t,
            bary,
            d1,
            d2,
            d1_dir,
            d2_dir,
            rim_value,
            rim_slope,
            fft: planner.plan_fft_forward(n_theta),
            ifft: planner.plan_fft_inverse(n_theta),
            fft_pad: planner.plan_fft_forward(n_pad),
            ifft_pad: planner.plan_fft_inverse(n_pad),
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_r, self.n_theta)
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_t
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_t
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    /// Area quadrature weight attached to each point of ring `i`.
    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }

    pub(crate) fn d1_dirichlet(&self) -> &[f64] {
        &self.d1_dir
    }

    pub(crate) fn d2_dirichlet(&self) -> &[f64] {
        &self.d2_dir
    }

    /// Cartesian coordinates of every grid point, in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r.iter().flat_map(move |&r| {
            self.cos_t
                .iter()
                .zip(&self.sin_t)
                .map(move |(c, s)| (r * c, r * s))
        })
    }

    /// Evaluates `f(r, θ)` at every grid point.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.r {
            for &t in &self.theta {
                out.push(f(r, t));
            }
        }
        out
    }

    pub fn check_len(&self, data: &[f64]) -> Result<()> {
        if data.len() != self.len() {
            let n_theta = self.n_theta;
            return Err(Error::GridMismatch {
                expected: self.shape(),
                found: (data.len() / n_theta, data.len() % n_theta + n_theta),
            });
        }
        Ok(())
    }

    /// `∫_D f dx`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_r {
            let ring: f64 = f[i * self.n_theta..(i + 1) * self.n_theta].iter().sum();
            total += self.area_weights[i] * ring;
        }
        total
    }

    /// `∫_D f g dx`.
    pub fn integrate_product(&self, f: &[f64], g: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_r {
            let s = i * self.n_theta..(i + 1) * self.n_theta;
            let ring: f64 = f[s.clone()].iter().zip(&g[s]).map(|(a, b)| a * b).sum();
            total += self.area_weights[i] * ring;
        }
        total
    }

    /// Applies a row-major `n_r × n_r` matrix along the radial index.
    pub fn radial_apply(&self, mat: &[f64], f: &[f64]) -> Vec<f64> {
        let (nr, nt) = self.shape();
        let mut out = vec![0.0; self.len()];
        for i in 0..nr {
            let dst = &mut out[i * nt..(i + 1) * nt];
            for k in 0..nr {
                let a = mat[i * nr + k];
                for (d, s) in dst.iter_mut().zip(&f[k * nt..(k + 1) * nt]) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn d_r(&self, f: &[f64]) -> Vec<f64> {
        self.radial_apply(&self.d1, f)
    }

    pub fn d_rr(&self, f: &[f64]) -> Vec<f64> {
        self.radial_apply(&self.d2, f)
    }

    /// Values extrapolated to the rim, one per angle.
    pub fn rim_values(&self, f: &[f64]) -> Vec<f64> {
        self.rim_combine(&self.rim_value, f)
    }

    /// `∂_r f` at the rim.
    pub fn rim_slopes(&self, f: &[f64]) -> Vec<f64> {
        self.rim_combine(&self.rim_slope, f)
    }

    fn rim_combine(&self, row: &[f64], f: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let mut out = vec![0.0; nt];
        for (i, e) in row.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(&f[i * nt..(i + 1) * nt]) {
                *o += e * v;
            }
        }
        out
    }

    /// Signed wavenumber of FFT bin `b` for length `n`.
    pub(crate) fn wavenumber(b: usize, n: usize) -> i64 {
        if b <= n / 2 {
            b as i64
        } else {
            b as i64 - n as i64
        }
    }

    /// Unnormalised angular DFT of every ring.
    pub fn rings_forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        buf
    }

    /// Inverse of [`rings_forward`](Self::rings_forward), real part.
    pub fn rings_inverse(&self, mut hat: Vec<Complex64>) -> Vec<f64> {
        self.ifft.process(&mut hat);
        let s = 1.0 / self.n_theta as f64;
        hat.into_iter().map(|c| c.re * s).collect()
    }

    pub fn d_theta(&self, f: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let mut hat = self.rings_forward(f);
        for row in hat.chunks_mut(nt) {
            for (b, c) in row.iter_mut().enumerate() {
                if b == nt / 2 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    let m = Self::wavenumber(b, nt) as f64;
                    *c = Complex64::new(-m * c.im, m * c.re);
                }
            }
        }
        self.rings_inverse(hat)
    }

    pub fn d_theta2(&self, f: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let mut hat = self.rings_forward(f);
        for row in hat.chunks_mut(nt) {
            for (b, c) in row.iter_mut().enumerate() {
                let m = Self::wavenumber(b, nt) as f64;
                *c *= -m * m;
            }
        }
        self.rings_inverse(hat)
    }

    pub fn padded_n_theta(&self) -> usize {
        3 * self.n_theta / 2
    }

    /// Resamples every ring on the 3/2-refined angular grid.
    pub fn pad(&self, f: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let np = self.padded_n_theta();
        let hat = self.rings_forward(f);
        let mut fine = vec![Complex64::new(0.0, 0.0); self.n_r * np];
        for (src, dst) in hat.chunks(nt).zip(fine.chunks_mut(np)) {
            for (b, c) in src.iter().enumerate() {
                let m = Self::wavenumber(b, nt);
                if b == nt / 2 {
                    // split the Nyquist coefficient so the padded ring stays real
                    dst[nt / 2] += 0.5 * c;
                    dst[np - nt / 2] += 0.5 * c;
                } else {
                    dst[m.rem_euclid(np as i64) as usize] = *c;
                }
            }
        }
        self.ifft_pad.process(&mut fine);
        let s = 1.0 / nt as f64;
        fine.into_iter().map(|c| c.re * s).collect()
    }

    /// Projects padded rings back to the base angular resolution.
    pub fn unpad(&self, fine: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let np = self.padded_n_theta();
        let mut buf: Vec<Complex64> = fine.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_pad.process(&mut buf);
        let mut hat = vec![Complex64::new(0.0, 0.0); self.len()];
        for (src, dst) in buf.chunks(np).zip(hat.chunks_mut(nt)) {
            for (b, d) in dst.iter_mut().enumerate() {
                let m = Self::wavenumber(b, nt);
                *d = if b == nt / 2 {
                    (src[nt / 2] + src[np - nt / 2]).re * Complex64::new(1.0, 0.0)
                } else {
                    src[m.rem_euclid(np as i64) as usize]
                };
            }
        }
        let s = nt as f64 / np as f64;
        for c in hat.iter_mut() {
            *c *= s;
        }
        self.rings_inverse(hat)
    }

    /// Interpolant of a grid function, evaluable anywhere in the closed disk.
    pub fn interpolant(&self, f: &[f64]) -> Interpolant<'_> {
        Interpolant {
            grid: self,
            hat: self.rings_forward(f),
        }
    }
}

/// Trigonometric in `θ`, polynomial in `r`.
pub struct Interpolant<'a> {
    grid: &'a DiskGrid,
    hat: Vec<Complex64>,
}

impl Interpolant<'_> {
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        let g = self.grid;
        let nt = g.n_theta;
        let phases: Vec<(f64, f64)> = (0..=nt / 2)
            .map(|m| {
                let a = m as f64 * theta;
                (a.cos(), a.sin())
            })
            .collect();
        let ring_vals: Vec<f64> = self
            .hat
            .chunks(nt)
            .map(|row| {
                let mut v = row[0].re;
                for (m, &(c, s)) in phases.iter().enumerate().take(nt / 2).skip(1) {
                    v += 2.0 * (row[m].re * c - row[m].im * s);
                }
                v += row[nt / 2].re * phases[nt / 2].0;
                v / nt as f64
            })
            .collect();
        let w = barycentric_row(&g.r, &g.bary, r);
        w.iter().zip(&ring_vals).map(|(a, b)| a * b).sum()
    }
}
