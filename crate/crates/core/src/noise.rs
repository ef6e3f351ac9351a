//! Transport-noise fields and Brownian drivers.
//!
//! Every noise field is the skew gradient of a smooth, compactly supported
//! stream function
//!
//! ```text
//! ξ_i = γ_i ∇^⊥χ_i,   χ_i(x) = β(|x|²/R²) p_i(x/R),   β(s) = exp(−a s/(1 − s)) for s < 1
//! ```
//!
//! where `p_i` runs through the harmonic polynomials `1, Re z, Im z, Re z², …`.
//! All supports are the nested disk `|x| < R`. Each `χ_i` is scaled so that
//! `sup |∇^⊥χ_i| = 1`, and `γ_i = A · i^{−d−1}`. Larger `a` concentrates
//! the bump away from the edge of its support, which the radial
//! interpolation resolves much better.
//!
//! Brownian increments come from a counter-based generator keyed by
//! `(seed, level, i, step)`, so any increment can be regenerated on its own.
//! Increments are rounded to multiples of 2⁻⁴⁴, which makes the bridge
//! split of a coarse increment into two fine ones sum back exactly.

use std::f64::consts::PI;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::field::{VectorField, VectorJet};
use crate::grid::DiskGrid;

const QUANTUM: f64 = 1.0 / (1u64 << 44) as f64;

/// Support geometry of the bump stream functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpParams {
    /// Support radius `R`.
    pub radius: f64,
    /// Bound the supports must stay below; must itself be below 1.
    pub r_max: f64,
    /// The constant `a` in the bump profile.
    pub sharpness: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self {
            radius: 0.85,
            r_max: 0.9,
            sharpness: 8.0,
        }
    }
}

/// `P_k` with `β^{(k)}(s) = P_k(q) e^{a − a q}`, `q = 1/(1 − s)`.
fn bump_polys(max_order: usize, a: f64) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![1.0]];
    for _ in 0..max_order {
        let p = polys.last().unwrap();
        // (P' − a P) q²
        let mut next = vec![0.0; p.len() + 2];
        for (k, c) in p.iter().enumerate() {
            next[k + 2] -= a * c;
            if k > 0 {
                next[k + 1] += k as f64 * c;
            }
        }
        polys.push(next);
    }
    polys
}

/// `[β(s), β'(s), …]` up to order `polys.len() − 1`.
fn bump_derivatives(polys: &[Vec<f64>], a: f64, s: f64) -> Vec<f64> {
    if s >= 1.0 {
        return vec![0.0; polys.len()];
    }
    let q = 1.0 / (1.0 - s);
    let e = (a - a * q).exp();
    polys
        .iter()
        .map(|p| p.iter().rev().fold(0.0, |acc, c| acc * q + c) * e)
        .collect()
}

/// One noise field `ξ = γ ∇^⊥χ`.
#[derive(Clone, Debug)]
pub struct XiField {
    pub index: usize,
    pub amplitude: f64,
    /// Harmonic degree of `p` and whether it is the real (cos) part.
    pub degree: u32,
    pub cosine: bool,
    pub radius: f64,
    pub sharpness: f64,
    scale: f64,
    polys: Vec<Vec<f64>>,
}

impl XiField {
    fn new(index: usize, amplitude: f64, bump: &BumpParams) -> Self {
        // 1, Re z, Im z, Re z², Im z², …
        let degree = (index / 2) as u32;
        let cosine = index == 1 || index.is_multiple_of(2);
        let mut f = Self {
            index,
            amplitude,
            degree,
            cosine,
            radius: bump.radius,
            sharpness: bump.sharpness,
            scale: 1.0,
            polys: bump_polys(4, bump.sharpness),
        };
        let peak = f.sup_over_support(&[vec![0], vec![1]], true);
        f.scale = 1.0 / peak;
        f
    }

    /// Largest `|∂^idx χ|` over the listed index lists, or of `|∇χ|` when
    /// `gradient_norm` is set, on a dense polar sampling of the support.
    fn sup_over_support(&self, indices: &[Vec<usize>], gradient_norm: bool) -> f64 {
        let (nr, nt) = (96, 192);
        let mut best = 0.0f64;
        for i in 0..nr {
            let r = self.radius * (i as f64 + 0.5) / nr as f64;
            for j in 0..nt {
                let t = 2.0 * PI * j as f64 / nt as f64;
                let (x, y) = (r * t.cos(), r * t.sin());
                if gradient_norm {
                    let (a, b) = (
                        self.chi_derivative(x, y, &[0]),
                        self.chi_derivative(x, y, &[1]),
                    );
                    best = best.max(a.hypot(b));
                } else {
                    for idx in indices {
                        best = best.max(self.chi_derivative(x, y, idx).abs());
                    }
                }
            }
        }
        best
    }

    /// Partial derivative of `χ` along the index list `idx` (0 = x, 1 = y).
    pub fn chi_derivative(&self, x: f64, y: f64, idx: &[usize]) -> f64 {
        let rr = self.radius * self.radius;
        let s = (x * x + y * y) / rr;
        if s >= 1.0 {
            return 0.0;
        }
        let b = bump_derivatives(&self.polys, self.sharpness, s);
        // g(t) = β(t / R²), g^{(k)} = β^{(k)} / R^{2k}
        let g: Vec<f64> = b
            .iter()
            .enumerate()
            .map(|(k, v)| v / rr.powi(k as i32))
            .collect();
        let pos = [x, y];
        let k = idx.len();
        let mut total = 0.0;
        for mask in 0..(1u32 << k) {
            let (mut a, mut rest) = (Vec::with_capacity(k), Vec::with_capacity(k));
            for (bit, &d) in idx.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    a.push(d);
                } else {
                    rest.push(d);
                }
            }
            let radial = radial_derivative(&g, pos, &a);
            if radial != 0.0 {
                total += radial * self.harmonic_derivative(x, y, &rest);
            }
        }
        self.scale * total
    }

    /// Derivative of `p(x/R) = Re or Im ((x + iy)/R)^m`.
    fn harmonic_derivative(&self, x: f64, y: f64, idx: &[usize]) -> f64 {
        let m = self.degree as usize;
        let k = idx.len();
        if k > m {
            return 0.0;
        }
        let ny = idx.iter().filter(|&&d| d == 1).count();
        let mut coeff = 1.0;
        for j in 0..k {
            coeff *= (m - j) as f64;
        }
        coeff /= self.radius.powi(m as i32);
        // i^ny (x + iy)^{m−k}
        let (mut re, mut im) = (1.0, 0.0);
        for _ in 0..(m - k) {
            (re, im) = (re * x - im * y, re * y + im * x);
        }
        for _ in 0..ny {
            (re, im) = (-im, re);
        }
        coeff * if self.cosine { re } else { im }
    }

    /// `(ξ, ∂_a ξ^b)` at a point, amplitude included.
    pub fn eval(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let g = self.amplitude;
        let d = |idx: &[usize]| self.chi_derivative(x, y, idx);
        (
            [-g * d(&[1]), g * d(&[0])],
            [
                [-g * d(&[1, 0]), -g * d(&[1, 1])],
                [g * d(&[0, 0]), g * d(&[0, 1])],
            ],
        )
    }

    /// Samples and analytic gradient on a grid.
    pub fn jet(&self, grid: &DiskGrid) -> VectorJet {
        let mut jet = VectorJet::zeros(grid);
        for (p, (x, y)) in grid.points().enumerate() {
            let (v, g) = self.eval(x, y);
            jet.value.u1[p] = v[0];
            jet.value.u2[p] = v[1];
            for b in 0..2 {
                for a in 0..2 {
                    jet.grad[b][a][p] = g[b][a];
                }
            }
        }
        jet
    }

    pub fn sample(&self, grid: &DiskGrid) -> VectorField {
        self.jet(grid).value
    }

    /// `max_{|β| ≤ 3} sup |∂^β ξ̂|` of the unit-amplitude field, by dense
    /// sampling of the support.
    pub fn w3_inf_norm(&self) -> f64 {
        let mut indices: Vec<Vec<usize>> = Vec::new();
        for order in 1..=4 {
            // derivatives commute, so sorted index lists suffice
            for ny in 0..=order {
                indices.push((0..order).map(|b| usize::from(b >= order - ny)).collect());
            }
        }
        self.sup_over_support(&indices, false)
    }
}

/// Derivative of `h(y) = g(|y|²)` along `idx`, given `g, g', …`.
fn radial_derivative(g: &[f64], y: [f64; 2], idx: &[usize]) -> f64 {
    let delta = |a: usize, b: usize| if idx[a] == idx[b] { 1.0 } else { 0.0 };
    let yy = |a: usize| y[idx[a]];
    match idx.len() {
        0 => g[0],
        1 => 2.0 * g[1] * yy(0),
        2 => 4.0 * g[2] * yy(0) * yy(1) + 2.0 * g[1] * delta(0, 1),
        3 => {
            8.0 * g[3] * yy(0) * yy(1) * yy(2)
                + 4.0 * g[2] * (delta(0, 1) * yy(2) + delta(0, 2) * yy(1) + delta(1, 2) * yy(0))
        }
        4 => {
            let pairs = [
                (0, 1, 2, 3),
                (0, 2, 1, 3),
                (0, 3, 1, 2),
                (1, 2, 0, 3),
                (1, 3, 0, 2),
                (2, 3, 0, 1),
            ];
            let mut t3 = 0.0;
            for &(a, b, c, d) in &pairs {
                t3 += delta(a, b) * yy(c) * yy(d);
            }
            16.0 * g[4] * yy(0) * yy(1) * yy(2) * yy(3)
                + 8.0 * g[3] * t3
                + 4.0
                    * g[2]
                    * (delta(0, 1) * delta(2, 3)
                        + delta(0, 2) * delta(1, 3)
                        + delta(0, 3) * delta(1, 2))
        }
        _ => unreachable!("derivatives above fourth order are not needed"),
    }
}

/// The truncated noise: `M` fields with decaying amplitudes.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    pub fields: Vec<XiField>,
    pub decay_rate: f64,
    pub bump: BumpParams,
}

/// Per-field contributions to `Σ γ_i² ‖ξ̂_i‖²_{W^{3,∞}}`.
#[derive(Clone, Debug)]
pub struct SummabilityReport {
    pub norms: Vec<f64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl NoiseModel {
    /// `modes` fields with `γ_i = amplitude · i^{−decay_rate−1}`.
    pub fn build(modes: usize, decay_rate: f64, amplitude: f64, bump: BumpParams) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument(
                "noise needs at least one mode".into(),
            ));
        }
        if !(decay_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "decay_rate = {decay_rate} must be positive"
            )));
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude = {amplitude} must be non-negative"
            )));
        }
        if !(bump.r_max < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bump r_max = {} touches the boundary",
                bump.r_max
            )));
        }
        if !(bump.sharpness > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bump sharpness = {} must be positive",
                bump.sharpness
            )));
        }
        if !(bump.radius > 0.0 && bump.radius <= bump.r_max) {
            return Err(Error::InvalidArgument(format!(
                "bump radius = {} must lie in (0, r_max = {}]",
                bump.radius, bump.r_max
            )));
        }
        let fields = (1..=modes)
            .map(|i| XiField::new(i, amplitude * (i as f64).powf(-decay_rate - 1.0), &bump))
            .collect();
        Ok(Self {
            fields,
            decay_rate,
            bump,
        })
    }

    /// A model with no fields; every stochastic term vanishes.
    pub fn none() -> Self {
        Self {
            fields: Vec::new(),
            decay_rate: 1.0,
            bump: BumpParams::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn summability(&self) -> SummabilityReport {
        let norms: Vec<f64> = self.fields.iter().map(|f| f.w3_inf_norm()).collect();
        let terms: Vec<f64> = self
            .fields
            .iter()
            .zip(&norms)
            .map(|(f, n)| (f.amplitude * n).powi(2))
            .collect();
        let partial_sums = terms
            .iter()
            .scan(0.0, |acc, t| {
                *acc += t;
                Some(*acc)
            })
            .collect();
        SummabilityReport {
            norms,
            terms,
            partial_sums,
        }
    }
}

/// Increments `ΔW^i` of `m` independent Brownian motions on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    pub seed: u64,
    pub level: u32,
    pub dt: f64,
    pub n_steps: usize,
    pub m: usize,
    /// `increments[step * m + i]`.
    pub increments: Vec<f64>,
}

fn quantize(v: f64) -> f64 {
    (v / QUANTUM).round() * QUANTUM
}

/// Standard normals for one `(seed, level, i)` stream, in step order.
fn normals(seed: u64, level: u32, i: usize, count: usize) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((level as u64) << 32) | i as u64);
    rng.set_word_pos(0);
    let unit = |v: u64| ((v >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    (0..count).map(move |_| {
        let (u1, u2) = (unit(rng.next_u64()), unit(rng.next_u64()));
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    })
}

/// Level-0 path with `n_steps` increments of size `dt` for `m` motions.
pub fn sample_path(seed: u64, n_steps: usize, dt: f64, m: usize) -> BrownianPath {
    let mut increments = vec![0.0; n_steps * m];
    let scale = dt.sqrt();
    for i in 0..m {
        for (step, z) in normals(seed, 0, i, n_steps).enumerate() {
            increments[step * m + i] = quantize(scale * z);
        }
    }
    BrownianPath {
        seed,
        level: 0,
        dt,
        n_steps,
        m,
        increments,
    }
}

/// Halves the step by Brownian-bridge midpoint insertion.
pub fn refine(path: &BrownianPath) -> BrownianPath {
    let m = path.m;
    let level = path.level + 1;
    let mut increments = vec![0.0; 2 * path.increments.len()];
    let spread = (path.dt / 4.0).sqrt();
    for i in 0..m {
        for (step, z) in normals(path.seed, level, i, path.n_steps).enumerate() {
            let coarse = path.increments[step * m + i];
            let first = quantize(0.5 * coarse + spread * z);
            increments[2 * step * m + i] = first;
            increments[(2 * step + 1) * m + i] = coarse - first;
        }
    }
    BrownianPath {
        seed: path.seed,
        level,
        dt: 0.5 * path.dt,
        n_steps: 2 * path.n_steps,
        m,
        increments,
    }
}

impl BrownianPath {
    /// A path with no motions or steps that are all zero.
    pub fn zeros(n_steps: usize, dt: f64, m: usize) -> Self {
        Self {
            seed: 0,
            level: 0,
            dt,
            n_steps,
            m,
            increments: vec![0.0; n_steps * m],
        }
    }

    pub fn step(&self, s: usize) -> &[f64] {
        &self.increments[s * self.m..(s + 1) * self.m]
    }

    /// Refines `times` times.
    pub fn refined(&self, times: u32) -> Self {
        (0..times).fold(self.clone(), |p, _| refine(&p))
    }
}

/// Seed of trajectory `index` in an ensemble.
pub fn trajectory_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}
