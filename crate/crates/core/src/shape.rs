//! Shape space of the planar three-body problem.
//!
//! Jacobi coordinates `z₁ = √(m₁m₂/(m₁+m₂)) (q₂ - q₁)`,
//! `z₂ = √(m₃(m₁+m₂)/M) (q₃ - c₁₂)` turn the mass metric into the flat
//! Hermitian metric on `ℂ²`, and the Hopf map
//!
//! ```text
//! w₁ = (|z₁|² - |z₂|²) / 2,   w₂ + i w₃ = z̄₁ z₂
//! ```
//!
//! sends a configuration to its shape `w ∈ ℝ³` with `|w| = I / 2` and
//! `w₃ = 2μΔ`. The equator `w₃ = 0` is the set of collinear triangles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbody::{MassSystem, PlanarConfig, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePoint {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl ShapePoint {
    pub const fn new(w1: f64, w2: f64, w3: f64) -> Self {
        Self { w1, w2, w3 }
    }

    pub fn norm(&self) -> f64 {
        (self.w1 * self.w1 + self.w2 * self.w2 + self.w3 * self.w3).sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.w1.hypot(self.w2)
    }

    /// `|w₃| / |w|`, the scale-free distance to the collinear equator.
    pub fn collinearity_ratio(&self) -> f64 {
        self.w3.abs() / self.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.w1 * s, self.w2 * s, self.w3 * s)
    }

    /// Rescale to `|w| = radius`.
    pub fn with_norm(&self, radius: f64) -> Self {
        self.scaled(radius / self.norm())
    }

    pub fn mirrored(&self) -> Self {
        Self::new(self.w1, self.w2, -self.w3)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.w1, self.w2, self.w3]
    }

    pub fn distance(&self, other: &ShapePoint) -> f64 {
        let d = [self.w1 - other.w1, self.w2 - other.w2, self.w3 - other.w3];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

impl From<[f64; 3]> for ShapePoint {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Point of the Klein disc `u₁² + u₂² < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KleinPoint {
    pub u1: f64,
    pub u2: f64,
}

impl KleinPoint {
    pub const fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiCoords {
    pub z1: Complex64,
    pub z2: Complex64,
}

#[inline]
pub(crate) fn to_complex(p: &Vec2) -> Complex64 {
    Complex64::new(p.x, p.y)
}

#[inline]
pub(crate) fn to_vec2(z: Complex64) -> Vec2 {
    Vec2::new(z.re, z.im)
}

/// Mass-weighted Jacobi vectors of an N-body configuration (`N - 1` of them).
///
/// `z_k = √(m_{k+1} M_k / M_{k+1}) (q_{k+1} - c_k)` where `c_k` and `M_k` are the
/// center of mass and total mass of the first `k` bodies. Only differences
/// of positions enter, so the same map sends velocities to Jacobi velocities.
pub fn jacobi_vectors(ms: &MassSystem, q: &[Vec2]) -> Result<Vec<Complex64>> {
    ms.check_len(q.len())?;
    let m = ms.masses();
    let mut partial_mass = m[0];
    let mut partial_cm = to_complex(&q[0]);
    let mut out = Vec::with_capacity(q.len() - 1);
    for k in 1..q.len() {
        let next_mass = partial_mass + m[k];
        let qk = to_complex(&q[k]);
        out.push((qk - partial_cm) * (m[k] * partial_mass / next_mass).sqrt());
        partial_cm = (partial_cm * partial_mass + qk * m[k]) / next_mass;
        partial_mass = next_mass;
    }
    Ok(out)
}

/// Inverse of [`jacobi_vectors`] onto the center-of-mass frame.
pub fn from_jacobi_vectors(ms: &MassSystem, z: &[Complex64]) -> Result<Vec<Vec2>> {
    ms.check_len(z.len() + 1)?;
    let m = ms.masses();
    // d_k = q_{k+1} - c_k; the first body's position follows from Σ m q = 0.
    let mut partial_mass = m[0];
    let mut d = Vec::with_capacity(z.len());
    let mut cm_offset = Complex64::new(0.0, 0.0);
    let mut offsets = Vec::with_capacity(z.len());
    for (k, zk) in z.iter().enumerate() {
        let next_mass = partial_mass + m[k + 1];
        let dk = zk / (m[k + 1] * partial_mass / next_mass).sqrt();
        offsets.push(cm_offset);
        cm_offset += dk * (m[k + 1] / next_mass);
        d.push(dk);
        partial_mass = next_mass;
    }
    let first = -cm_offset;
    let mut q = Vec::with_capacity(z.len() + 1);
    q.push(to_vec2(first));
    for (dk, off) in d.iter().zip(&offsets) {
        q.push(to_vec2(first + off + dk));
    }
    Ok(q)
}

pub fn jacobi_coordinates(ms: &MassSystem, q: &PlanarConfig) -> Result<JacobiCoords> {
    ms.require_three()?;
    let z = jacobi_vectors(ms, q.points())?;
    Ok(JacobiCoords { z1: z[0], z2: z[1] })
}

/// Hopf map `(z₁, z₂) ↦ ((|z₁|² - |z₂|²)/2, Re z̄₁z₂, Im z̄₁z₂)`.
pub fn hopf(z: &JacobiCoords) -> ShapePoint {
    let c = z.z1.conj() * z.z2;
    ShapePoint::new(0.5 * (z.z1.norm_sqr() - z.z2.norm_sqr()), c.re, c.im)
}

/// Shape-space projection of a three-body configuration.
pub fn shape_project(ms: &MassSystem, q: &PlanarConfig) -> Result<ShapePoint> {
    Ok(hopf(&jacobi_coordinates(ms, q)?))
}

/// Time derivative `dw/dt` of the shape along velocity `v` at configuration `q`.
pub fn shape_velocity(ms: &MassSystem, q: &PlanarConfig, v: &[Vec2]) -> Result<ShapePoint> {
    ms.require_three()?;
    let z = jacobi_vectors(ms, q.points())?;
    let dz = jacobi_vectors(ms, v)?;
    let dc = dz[0].conj() * z[1] + z[0].conj() * dz[1];
    Ok(ShapePoint::new((z[0].conj() * dz[0]).re - (z[1].conj() * dz[1]).re, dc.re, dc.im))
}

/// Jacobi coordinates of a shape in the gauge where `z₁` is real and non-negative.
pub fn lift_to_jacobi(w: &ShapePoint) -> Result<JacobiCoords> {
    let r = w.norm();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::DegenerateShape);
    }
    let a2 = (r + w.w1).max(0.0);
    let b2 = (r - w.w1).max(0.0);
    let a = a2.sqrt();
    let (z1, z2) = if a > 1e-8 * r.sqrt() {
        (Complex64::new(a, 0.0), Complex64::new(w.w2, w.w3) / a)
    } else {
        // z₁ ≈ 0: the phase of z₂ is free; take it real.
        (Complex64::new(a, 0.0), Complex64::new(b2.sqrt(), 0.0))
    };
    Ok(JacobiCoords { z1, z2 })
}

/// Center-of-mass configuration whose shape is `w`, with `I = 2|w|` and the
/// first Jacobi vector along the positive x-axis.
pub fn lift_to_configuration(ms: &MassSystem, w: &ShapePoint) -> Result<PlanarConfig> {
    ms.require_three()?;
    let z = lift_to_jacobi(w)?;
    Ok(PlanarConfig(from_jacobi_vectors(ms, &[z.z1, z.z2])?))
}

pub fn klein_to_jemisphere(k: &KleinPoint) -> Result<ShapePoint> {
    let r2 = k.u1 * k.u1 + k.u2 * k.u2;
    if !(r2 < 1.0) {
        return Err(Error::Domain(format!("Klein point ({}, {}) is not inside the unit disc", k.u1, k.u2)));
    }
    Ok(ShapePoint::new(k.u1, k.u2, (1.0 - r2).sqrt()))
}

/// Vertical projection of the open upper unit hemisphere onto the Klein disc.
pub fn jemisphere_to_klein(w: &ShapePoint) -> Result<KleinPoint> {
    if !(w.w3 > 0.0) {
        return Err(Error::Domain(format!("w3 = {} is not in the open upper hemisphere", w.w3)));
    }
    if (w.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("point is not on the unit sphere (|w| = {})", w.norm())));
    }
    Ok(KleinPoint::new(w.w1, w.w2))
}
