//! Differential operators on grid fields.
//!
//! Conventions, fixed everywhere in the crate:
//!
//! ```text
//! ∇^⊥s = (−∂₂s, ∂₁s)     curl f = ∂₁f² − ∂₂f¹     curl ∇^⊥s = Δs
//! ℒ_φ f = Σ_j φ^j ∂_j f    𝒯_ξ f = Σ_j f^j ∇ξ^j    B_ξ = ℒ_ξ + 𝒯_ξ
//! ```
//!
//! The Leray projection solves `Δψ = curl f`, `ψ = 0` on the rim, one
//! angular wavenumber at a time, and returns `∇^⊥ψ`. Quadratic products are
//! formed on a 3/2-refined angular grid.

use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, LU};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{BoundaryTrace, ScalarField, VectorField, VectorJet};
use crate::grid::DiskGrid;

/// Spectral operators bound to one grid.
pub struct Operators {
    grid: Arc<DiskGrid>,
    poisson: Vec<LU<f64, Dyn, Dyn>>,
}

impl std::fmt::Debug for Operators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Operators")
            .field("grid", &self.grid)
            .finish()
    }
}

/// A vector jet resampled on the refined angular grid, ready for products.
#[derive(Clone, Debug)]
pub struct PaddedJet {
    pub value: [Vec<f64>; 2],
    pub grad: [[Vec<f64>; 2]; 2],
}

impl Operators {
    pub fn new(grid: Arc<DiskGrid>) -> Result<Self> {
        let n = grid.n_r();
        let r = grid.radii();
        let (d1, d2) = (grid.d1_dirichlet(), grid.d2_dirichlet());
        let mut poisson = Vec::with_capacity(grid.n_theta() / 2 + 1);
        for m in 0..=grid.n_theta() / 2 {
            let m2 = (m * m) as f64;
            let mat = DMatrix::from_fn(n, n, |i, k| {
                let diag = if i == k { m2 } else { 0.0 };
                r[i] * r[i] * d2[i * n + k] + r[i] * d1[i * n + k] - diag
            });
            let lu = mat.lu();
            if !lu.is_invertible() {
                return Err(Error::Solver(format!(
                    "radial Poisson block for m = {m} is singular"
                )));
            }
            poisson.push(lu);
        }
        Ok(Self { grid, poisson })
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    fn polar_to_xy(&self, fr: &[f64], ft: &[f64]) -> [Vec<f64>; 2] {
        let g = &self.grid;
        let nt = g.n_theta();
        let mut dx = vec![0.0; g.len()];
        let mut dy = vec![0.0; g.len()];
        for (i, &r) in g.radii().iter().enumerate() {
            for j in 0..nt {
                let p = i * nt + j;
                let (c, s) = (g.cos_theta()[j], g.sin_theta()[j]);
                dx[p] = c * fr[p] - s / r * ft[p];
                dy[p] = s * fr[p] + c / r * ft[p];
            }
        }
        [dx, dy]
    }

    /// Cartesian gradient `[∂₁s, ∂₂s]`.
    pub fn gradient(&self, s: &[f64]) -> [Vec<f64>; 2] {
        self.polar_to_xy(&self.grid.d_r(s), &self.grid.d_theta(s))
    }

    /// Gradient of a function that vanishes on the rim.
    fn gradient_dirichlet(&self, s: &[f64]) -> [Vec<f64>; 2] {
        let fr = self.grid.radial_apply(self.grid.d1_dirichlet(), s);
        self.polar_to_xy(&fr, &self.grid.d_theta(s))
    }

    /// `f` with its spectrally computed gradient.
    pub fn jet(&self, f: &VectorField) -> VectorJet {
        let [a, b] = self.gradient(&f.u1);
        let [c, d] = self.gradient(&f.u2);
        VectorJet {
            value: f.clone(),
            grad: [[a, b], [c, d]],
        }
    }

    pub fn laplacian(&self, s: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let nt = g.n_theta();
        let (sr, srr, stt) = (g.d_r(s), g.d_rr(s), g.d_theta2(s));
        let mut out = vec![0.0; g.len()];
        for (i, &r) in g.radii().iter().enumerate() {
            for j in 0..nt {
                let p = i * nt + j;
                out[p] = srr[p] + sr[p] / r + stt[p] / (r * r);
            }
        }
        out
    }

    pub fn vector_laplacian(&self, f: &VectorField) -> VectorField {
        VectorField::from_parts(&self.grid, self.laplacian(&f.u1), self.laplacian(&f.u2))
    }

    pub fn curl(&self, f: &VectorField) -> ScalarField {
        let [d1u2, _] = self.gradient(&f.u2);
        let [_, d2u1] = self.gradient(&f.u1);
        ScalarField::from_data(
            &self.grid,
            d1u2.iter().zip(&d2u1).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn divergence(&self, f: &VectorField) -> ScalarField {
        let [d1u1, _] = self.gradient(&f.u1);
        let [_, d2u2] = self.gradient(&f.u2);
        ScalarField::from_data(
            &self.grid,
            d1u1.iter().zip(&d2u2).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn grad_perp(&self, s: &ScalarField) -> VectorField {
        let [dx, dy] = self.gradient(&s.data);
        VectorField::from_parts(&self.grid, dy.into_iter().map(|v| -v).collect(), dx)
    }

    /// Solves `Δψ = g` with `ψ = 0` on the rim.
    pub fn poisson_dirichlet(&self, g: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let (nr, nt) = grid.shape();
        let r = grid.radii();
        let mut hat = grid.rings_forward(g);
        let mut rhs = DMatrix::<f64>::zeros(nr, 2);
        for b in 0..nt {
            let m = DiskGrid::wavenumber(b, nt).unsigned_abs() as usize;
            for i in 0..nr {
                let c = hat[i * nt + b] * (r[i] * r[i]);
                rhs[(i, 0)] = c.re;
                rhs[(i, 1)] = c.im;
            }
            self.poisson[m].solve_mut(&mut rhs);
            for i in 0..nr {
                hat[i * nt + b] = Complex64::new(rhs[(i, 0)], rhs[(i, 1)]);
            }
        }
        grid.rings_inverse(hat)
    }

    /// Stream function of the divergence-free part of `f`.
    pub fn leray_stream(&self, f: &VectorField) -> Result<Vec<f64>> {
        f.check(&self.grid)?;
        Ok(self.poisson_dirichlet(&self.curl(f).data))
    }

    /// `𝒫f = ∇^⊥ψ` with `Δψ = curl f`, `ψ|_{r=1} = 0`.
    pub fn leray_project(&self, f: &VectorField) -> Result<VectorField> {
        let psi = self.leray_stream(f)?;
        let [dx, dy] = self.gradient_dirichlet(&psi);
        Ok(VectorField::from_parts(
            &self.grid,
            dy.into_iter().map(|v| -v).collect(),
            dx,
        ))
    }

    /// `Af = −𝒫Δf` evaluated on the grid.
    pub fn stokes_apply(&self, f: &VectorField) -> Result<VectorField> {
        let mut out = self.leray_project(&self.vector_laplacian(f))?;
        out.scale(-1.0);
        Ok(out)
    }

    pub fn pad_jet(&self, jet: &VectorJet) -> PaddedJet {
        let g = &self.grid;
        PaddedJet {
            value: [g.pad(&jet.value.u1), g.pad(&jet.value.u2)],
            grad: [
                [g.pad(&jet.grad[0][0]), g.pad(&jet.grad[0][1])],
                [g.pad(&jet.grad[1][0]), g.pad(&jet.grad[1][1])],
            ],
        }
    }

    /// `ℒ_φ f` from pre-padded operands; only `φ`'s value and `f`'s gradient
    /// are read.
    pub fn advect_padded(&self, phi: &PaddedJet, f: &PaddedJet) -> VectorField {
        let comp = |b: usize| -> Vec<f64> {
            let fine: Vec<f64> = (0..phi.value[0].len())
                .map(|p| phi.value[0][p] * f.grad[b][0][p] + phi.value[1][p] * f.grad[b][1][p])
                .collect();
            self.grid.unpad(&fine)
        };
        VectorField::from_parts(&self.grid, comp(0), comp(1))
    }

    /// `𝒯_ξ f` from pre-padded operands; reads `ξ`'s gradient and `f`'s value.
    pub fn salt_t_padded(&self, xi: &PaddedJet, f: &PaddedJet) -> VectorField {
        let comp = |a: usize| -> Vec<f64> {
            let fine: Vec<f64> = (0..f.value[0].len())
                .map(|p| f.value[0][p] * xi.grad[0][a][p] + f.value[1][p] * xi.grad[1][a][p])
                .collect();
            self.grid.unpad(&fine)
        };
        VectorField::from_parts(&self.grid, comp(0), comp(1))
    }

    /// `B_ξ f = ℒ_ξ f + 𝒯_ξ f` from pre-padded operands.
    pub fn salt_b_padded(&self, xi: &PaddedJet, f: &PaddedJet) -> VectorField {
        let mut out = self.advect_padded(xi, f);
        out.axpy(1.0, &self.salt_t_padded(xi, f));
        out
    }

    /// `ℒ_φ f` with `f` differentiated spectrally.
    pub fn advect(&self, phi: &VectorField, f: &VectorField) -> Result<VectorField> {
        phi.check(&self.grid)?;
        f.check(&self.grid)?;
        Ok(self.advect_jet(phi, &self.jet(f)))
    }

    /// `ℒ_φ f` with `f`'s gradient supplied.
    pub fn advect_jet(&self, phi: &VectorField, f: &VectorJet) -> VectorField {
        let g = &self.grid;
        let p = [g.pad(&phi.u1), g.pad(&phi.u2)];
        let comp = |b: usize| -> Vec<f64> {
            let d0 = g.pad(&f.grad[b][0]);
            let d1 = g.pad(&f.grad[b][1]);
            let fine: Vec<f64> = (0..d0.len())
                .map(|k| p[0][k] * d0[k] + p[1][k] * d1[k])
                .collect();
            g.unpad(&fine)
        };
        VectorField::from_parts(g, comp(0), comp(1))
    }

    /// `ℒ_φ s = φ·∇s` for a scalar.
    pub fn advect_scalar(&self, phi: &VectorField, s: &ScalarField) -> Result<ScalarField> {
        phi.check(&self.grid)?;
        s.check(&self.grid)?;
        let grad = self.gradient(&s.data);
        Ok(ScalarField::from_data(
            &self.grid,
            self.dot_padded(phi, &grad),
        ))
    }

    /// `φ·v` formed on the refined angular grid.
    pub fn dot_padded(&self, phi: &VectorField, v: &[Vec<f64>; 2]) -> Vec<f64> {
        let g = &self.grid;
        let (a, b) = (g.pad(&phi.u1), g.pad(&phi.u2));
        let (c, d) = (g.pad(&v[0]), g.pad(&v[1]));
        let fine: Vec<f64> = (0..a.len()).map(|k| a[k] * c[k] + b[k] * d[k]).collect();
        g.unpad(&fine)
    }

    /// `𝒯_ξ f = Σ_j f^j ∇ξ^j`.
    pub fn salt_t(&self, xi: &VectorJet, f: &VectorField) -> Result<VectorField> {
        f.check(&self.grid)?;
        xi.value.check(&self.grid)?;
        let pf = self.pad_jet(&VectorJet {
            value: f.clone(),
            grad: xi.grad.clone(),
        });
        Ok(self.salt_t_padded(&pf, &pf))
    }

    /// `B_ξ f = ℒ_ξ f + 𝒯_ξ f`.
    pub fn salt_b(&self, xi: &VectorJet, f: &VectorField) -> Result<VectorField> {
        let mut out = self.advect(&xi.value, f)?;
        out.axpy(1.0, &self.salt_t(xi, f)?);
        Ok(out)
    }

    /// Rim samples of `f·n` and `f·ι`.
    pub fn boundary_trace(&self, f: &VectorField) -> BoundaryTrace {
        let g = &self.grid;
        let (a, b) = (g.rim_values(&f.u1), g.rim_values(&f.u2));
        let (c, s) = (g.cos_theta(), g.sin_theta());
        BoundaryTrace {
            normal: (0..a.len()).map(|j| a[j] * c[j] + b[j] * s[j]).collect(),
            tangential: (0..a.len()).map(|j| -a[j] * s[j] + b[j] * c[j]).collect(),
        }
    }

    pub fn inner_l2(&self, f: &VectorField, g: &VectorField) -> f64 {
        self.grid.integrate_product(&f.u1, &g.u1) + self.grid.integrate_product(&f.u2, &g.u2)
    }

    /// `⟨f, g⟩₁ = Σ ⟨∂_a f^b, ∂_a g^b⟩` from supplied gradients.
    pub fn inner_h1_jets(&self, f: &VectorJet, g: &VectorJet) -> f64 {
        let mut total = 0.0;
        for b in 0..2 {
            for a in 0..2 {
                total += self.grid.integrate_product(&f.grad[b][a], &g.grad[b][a]);
            }
        }
        total
    }

    pub fn inner_h1(&self, f: &VectorField, g: &VectorField) -> f64 {
        self.inner_h1_jets(&self.jet(f), &self.jet(g))
    }

    /// `∫_{∂D} f·g` by the trapezoid rule in `θ`.
    pub fn inner_boundary(&self, f: &VectorField, g: &VectorField) -> f64 {
        let grid = &self.grid;
        let (f1, f2) = (grid.rim_values(&f.u1), grid.rim_values(&f.u2));
        let (g1, g2) = (grid.rim_values(&g.u1), grid.rim_values(&g.u2));
        let sum: f64 = (0..f1.len()).map(|j| f1[j] * g1[j] + f2[j] * g2[j]).sum();
        sum * grid.dtheta()
    }

    /// `⟨f, g⟩_H = ⟨f, g⟩₁ − (κ − α)⟨f, g⟩_∂` with `κ = 1`.
    pub fn inner_h(&self, f: &VectorField, g: &VectorField, alpha: f64) -> f64 {
        self.inner_h1(f, g) - (1.0 - alpha) * self.inner_boundary(f, g)
    }

    /// The three terms of the boundary Green identity
    /// `(⟨Δf, φ⟩, ⟨f, φ⟩₁, (κ − α)⟨f, φ⟩_∂)`.
    pub fn greens_terms(&self, f: &VectorField, phi: &VectorField, alpha: f64) -> [f64; 3] {
        let lap = self.vector_laplacian(f);
        [
            self.inner_l2(&lap, phi),
            self.inner_h1(f, phi),
            (1.0 - alpha) * self.inner_boundary(f, phi),
        ]
    }

    /// `|⟨Δf, φ⟩ + ⟨f, φ⟩₁ − (κ − α)⟨f, φ⟩_∂|`; only meaningful when `f`
    /// satisfies the slip condition for `α`.
    pub fn greens_defect(&self, f: &VectorField, phi: &VectorField, alpha: f64) -> f64 {
        let [a, b, c] = self.greens_terms(f, phi, alpha);
        (a + b - c).abs()
    }

    /// `‖curl 𝒫B_ξφ − ℒ_ξ curl φ‖`.
    pub fn curl_commute_defect(&self, xi: &VectorJet, phi: &VectorField) -> Result<f64> {
        let lhs = self.curl(&self.leray_project(&self.salt_b(xi, phi)?)?);
        let rhs = self.advect_scalar(&xi.value, &self.curl(phi))?;
        let diff: Vec<f64> = lhs.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(self.grid.integrate_product(&diff, &diff).sqrt())
    }

    /// `|⟨ℒ_φf, g⟩ + ⟨f, ℒ_φg⟩|`.
    pub fn nonlinear_antisymmetry_defect(
        &self,
        phi: &VectorField,
        f: &VectorField,
        g: &VectorField,
    ) -> Result<f64> {
        let a = self.inner_l2(&self.advect(phi, f)?, g);
        let b = self.inner_l2(f, &self.advect(phi, g)?);
        Ok((a + b).abs())
    }

    /// `|⟨ℒ_φf, g⟩| / (‖φ‖^½ ‖φ‖₁^½ ‖f‖₁ ‖g‖^½ ‖g‖₁^½)`.
    pub fn ladyzhenskaya_ratio(
        &self,
        phi: &VectorField,
        f: &VectorField,
        g: &VectorField,
    ) -> Result<f64> {
        let tri = self.inner_l2(&self.advect(phi, f)?, g).abs();
        let l2 = |v: &VectorField| self.inner_l2(v, v).sqrt();
        let h1 = |v: &VectorField| self.inner_h1(v, v).sqrt();
        let denom = (l2(phi) * h1(phi)).sqrt() * h1(f) * (l2(g) * h1(g)).sqrt();
        Ok(tri / denom)
    }

    /// `‖f‖²_{L²(∂D)} / (‖f‖ ‖f‖_{W^{1,2}})`.
    pub fn trace_ratio(&self, f: &VectorField) -> f64 {
        let l2 = self.inner_l2(f, f);
        let w12 = (l2 + self.inner_h1(f, f)).sqrt();
        self.inner_boundary(f, f) / (l2.sqrt() * w12)
    }
}
