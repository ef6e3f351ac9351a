//! Grid fields and the binary snapshot format.
//!
//! ```text
//! "SDNS" | version u32 | n_r u32 | n_theta u32 | component arrays (f64)
//! ```
//!
//! All integers and floats are little-endian; each component is stored
//! row-major with the radial index outermost.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::DiskGrid;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"SDNS";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub n_r: usize,
    pub n_theta: usize,
    pub data: Vec<f64>,
}

/// Cartesian components `(u¹, u²)` sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub n_r: usize,
    pub n_theta: usize,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

/// A vector field with its Cartesian gradient, `grad[b][a] = ∂_a u^b`.
#[derive(Clone, Debug)]
pub struct VectorJet {
    pub value: VectorField,
    pub grad: [[Vec<f64>; 2]; 2],
}

/// Rim samples of a vector field in the polar frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub normal: Vec<f64>,
    pub tangential: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &DiskGrid) -> Self {
        Self::from_data(grid, vec![0.0; grid.len()])
    }

    pub fn from_data(grid: &DiskGrid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len(), "sample count must match the grid");
        Self {
            n_r: grid.n_r(),
            n_theta: grid.n_theta(),
            data,
        }
    }

    /// Samples `f(x, y)`.
    pub fn from_fn(grid: &DiskGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_data(grid, grid.points().map(|(x, y)| f(x, y)).collect())
    }

    pub fn check(&self, grid: &DiskGrid) -> Result<()> {
        check_shape(grid, self.n_r, self.n_theta)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn write_snapshot<W: Write>(&self, w: W) -> Result<()> {
        write_snapshot(w, self.n_r, self.n_theta, &[&self.data])
    }
}

impl VectorField {
    pub fn zeros(grid: &DiskGrid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()], vec![0.0; grid.len()])
    }

    pub fn from_parts(grid: &DiskGrid, u1: Vec<f64>, u2: Vec<f64>) -> Self {
        assert_eq!(u1.len(), grid.len(), "sample count must match the grid");
        assert_eq!(u2.len(), grid.len(), "sample count must match the grid");
        Self {
            n_r: grid.n_r(),
            n_theta: grid.n_theta(),
            u1,
            u2,
        }
    }

    /// Samples `f(x, y) = (u¹, u²)`.
    pub fn from_fn(grid: &DiskGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let (mut u1, mut u2) = (
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
        );
        for (x, y) in grid.points() {
            let v = f(x, y);
            u1.push(v[0]);
            u2.push(v[1]);
        }
        Self::from_parts(grid, u1, u2)
    }

    pub fn check(&self, grid: &DiskGrid) -> Result<()> {
        check_shape(grid, self.n_r, self.n_theta)
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| v.is_finite())
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.u1.iter_mut().chain(self.u2.iter_mut()) {
            *v *= s;
        }
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (d, s) in self.u1.iter_mut().zip(&other.u1) {
            *d += a * s;
        }
        for (d, s) in self.u2.iter_mut().zip(&other.u2) {
            *d += a * s;
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.u1
            .iter()
            .chain(&self.u2)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn write_snapshot<W: Write>(&self, w: W) -> Result<()> {
        write_snapshot(w, self.n_r, self.n_theta, &[&self.u1, &self.u2])
    }
}

impl VectorJet {
    pub fn zeros(grid: &DiskGrid) -> Self {
        let z = || vec![0.0; grid.len()];
        Self {
            value: VectorField::zeros(grid),
            grad: [[z(), z()], [z(), z()]],
        }
    }

    pub fn divergence(&self) -> Vec<f64> {
        self.grad[0][0]
            .iter()
            .zip(&self.grad[1][1])
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn scale(&mut self, s: f64) {
        self.value.scale(s);
        for row in self.grad.iter_mut() {
            for g in row.iter_mut() {
                for v in g.iter_mut() {
                    *v *= s;
                }
            }
        }
    }
}

fn check_shape(grid: &DiskGrid, n_r: usize, n_theta: usize) -> Result<()> {
    if (n_r, n_theta) != grid.shape() {
        return Err(Error::GridMismatch {
            expected: grid.shape(),
            found: (n_r, n_theta),
        });
    }
    Ok(())
}

/// Polar partial derivatives of a scalar, `[f_r, f_θ, f_rr, f_rθ, f_θθ]`,
/// converted to `([f_x, f_y], [f_xx, f_xy, f_yy])` at radius `r` and angle
/// with cosine `c`, sine `s`.
pub(crate) fn polar_to_cartesian(r: f64, c: f64, s: f64, d: [f64; 5]) -> ([f64; 2], [f64; 3]) {
    let [fr, ft, frr, frt, ftt] = d;
    let ir = 1.0 / r;
    let ir2 = ir * ir;
    let fx = c * fr - s * ir * ft;
    let fy = s * fr + c * ir * ft;
    let cs = c * s;
    let c2s2 = c * c - s * s;
    let fxx = c * c * frr + s * s * ir * fr - 2.0 * cs * ir * frt
        + 2.0 * cs * ir2 * ft
        + s * s * ir2 * ftt;
    let fyy = s * s * frr + c * c * ir * fr + 2.0 * cs * ir * frt - 2.0 * cs * ir2 * ft
        + c * c * ir2 * ftt;
    let fxy = cs * frr - cs * ir * fr + c2s2 * ir * frt - c2s2 * ir2 * ft - cs * ir2 * ftt;
    ([fx, fy], [fxx, fxy, fyy])
}

pub fn write_snapshot<W: Write>(
    mut w: W,
    n_r: usize,
    n_theta: usize,
    components: &[&[f64]],
) -> Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    for n in [n_r, n_theta] {
        let n =
            u32::try_from(n).map_err(|_| Error::Snapshot(format!("dimension {n} exceeds u32")))?;
        w.write_all(&n.to_le_bytes())?;
    }
    for comp in components {
        if comp.len() != n_r * n_theta {
            return Err(Error::Snapshot(format!(
                "component has {} samples, expected {}",
                comp.len(),
                n_r * n_theta
            )));
        }
        let mut buf = Vec::with_capacity(comp.len() * 8);
        for v in comp.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub n_r: usize,
    pub n_theta: usize,
    pub components: Vec<Vec<f64>>,
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("missing SDNS header".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    let version = word(4);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let (n_r, n_theta) = (word(8) as usize, word(12) as usize);
    let per = n_r * n_theta * 8;
    let body = &bytes[16..];
    if per == 0 || body.len() % per != 0 || body.is_empty() {
        return Err(Error::Snapshot(format!(
            "payload of {} bytes is not a whole number of {n_r}x{n_theta} components",
            body.len()
        )));
    }
    let components = body
        .chunks(per)
        .map(|c| {
            c.chunks(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok(Snapshot {
        n_r,
        n_theta,
        components,
    })
}
