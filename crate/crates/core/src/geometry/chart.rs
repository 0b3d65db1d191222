//! Affine charts of `CP^{N-2}` in Jacobi coordinates.
//!
//! A cm-frame N-gon has Jacobi vectors `z = (z₁, …, z_{N-1}) ∈ ℂ^{N-1}`
//! with `|z|² = I`. Off the hyperplane `z_{N-1} = 0` its class is
//! `ζ_k = z_k / z_{N-1}`, `k < N - 1`. The mass metric restricted to the
//! horizontal directions of the unit sphere `I = 1` is the Fubini-Study
//! metric of the chart.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jm::vn_potential;
use crate::error::{Error, Result};
use crate::nbody::{moment_of_inertia, MassSystem, PlanarConfig};
use crate::shape::{from_jacobi_vectors, jacobi_vectors};

/// Relative size of `z_{N-1}` below which a configuration is treated as
/// lying on the deleted hyperplane.
const CHART_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub n_bodies: usize,
    pub coords: Vec<Complex64>,
}

impl ChartPoint {
    pub fn new(n_bodies: usize, coords: Vec<Complex64>) -> Result<Self> {
        if n_bodies < 3 || coords.len() != n_bodies - 2 {
            return Err(Error::Usage(format!(
                "a chart point for {n_bodies} bodies needs {} coordinates, got {}",
                n_bodies.saturating_sub(2),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage("chart coordinates must be finite".into()));
        }
        Ok(Self { n_bodies, coords })
    }

    pub fn from_configuration(ms: &MassSystem, q: &PlanarConfig) -> Result<Self> {
        let z = jacobi_vectors(ms, q.points())?;
        let last = *z.last().ok_or(Error::Chart)?;
        let size = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(last.norm() > CHART_TOLERANCE * size) {
            return Err(Error::Chart);
        }
        Self::new(q.len(), z[..z.len() - 1].iter().map(|c| c / last).collect())
    }

    /// Real coordinates `(Re ζ₁, Im ζ₁, Re ζ₂, …)`.
    pub fn to_real(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn from_real(n_bodies: usize, x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::Usage(format!("odd number of real chart coordinates: {}", x.len())));
        }
        Self::new(n_bodies, x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    /// Real dimension `2(N - 2)`.
    pub fn dim(&self) -> usize {
        2 * self.coords.len()
    }

    /// Jacobi vectors `(ζ, 1)` scaled to `I = 1`.
    pub fn representative(&self) -> Vec<Complex64> {
        let norm = (1.0 + self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        self.coords.iter().copied().chain(std::iter::once(Complex64::new(1.0, 0.0))).map(|c| c / norm).collect()
    }

    /// The cm-frame configuration with `I = 1` in this class.
    pub fn to_configuration(&self, ms: &MassSystem) -> Result<PlanarConfig> {
        Ok(PlanarConfig(from_jacobi_vectors(ms, &self.representative())?))
    }
}

/// Homogeneous degree −2 potentials whose JM metrics descend to `CP^{N-2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ChartPotential {
    /// `V_N`, the three-body potential summed over triples.
    #[default]
    Triples,
    /// The strong-force potential `-γ Σ m_a m_b / r_ab²` over pairs.
    StrongForce,
}

impl ChartPotential {
    pub fn evaluate(&self, ms: &MassSystem, q: &PlanarConfig) -> Result<f64> {
        match self {
            ChartPotential::Triples => vn_potential(ms, q),
            ChartPotential::StrongForce => strong_force_potential(ms, q),
        }
    }
}

/// `V₂ = -γ Σ_{a<b} m_a m_b / r_ab²`.
pub fn strong_force_potential(ms: &MassSystem, q: &PlanarConfig) -> Result<f64> {
    ms.check_len(q.len())?;
    let m = ms.masses();
    let p = q.points();
    let scale = moment_of_inertia(ms, q) / ms.total_mass();
    let mut acc = 0.0;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            let r2 = (p[a] - p[b]).norm_squared();
            if !(r2 > 1e-24 * scale) {
                return Err(Error::Collision { pair: [a, b] });
            }
            acc += m[a] * m[b] / r2;
        }
    }
    Ok(-ms.gamma() * acc)
}

/// `Ũ = I·U` with `U = -V_N`; invariant under scaling and rotation.
pub fn scale_free_potential(ms: &MassSystem, p: &ChartPoint) -> Result<f64> {
    scale_free_potential_for(ms, p, ChartPotential::Triples)
}

pub fn scale_free_potential_for(ms: &MassSystem, p: &ChartPoint, pot: ChartPotential) -> Result<f64> {
    let q = p.to_configuration(ms)?;
    Ok(-moment_of_inertia(ms, &q) * pot.evaluate(ms, &q)?)
}

/// Fubini-Study metric on the affine chart as a real `2(N-2)` square matrix:
/// `Re[(1 + |ζ|²)⟨X, Y⟩ - (ζ̄·X)(ζ·Ȳ)] / (1 + |ζ|²)²`.
pub fn fs_metric(p: &ChartPoint) -> DMatrix<f64> {
    let n = p.coords.len();
    let s = 1.0 + p.coords.iter().map(|c| c.norm_sqr()).sum::<f64>();
    // real basis vector a is the complex vector with entry 1 or i at slot a / 2
    let basis = |a: usize| if a.is_multiple_of(2) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
    DMatrix::from_fn(2 * n, 2 * n, |a, b| {
        let (xa, xb) = (basis(a), basis(b));
        let (ka, kb) = (a / 2, b / 2);
        let inner = if ka == kb { xa * xb.conj() } else { Complex64::new(0.0, 0.0) };
        let pa = p.coords[ka].conj() * xa;
        let pb = p.coords[kb].conj() * xb;
        (s * inner - pa * pb.conj()).re / (s * s)
    })
}

/// Conformal factor `2Ũ` of the pushed-down JM metric relative to `g_FS`.
pub fn jm_conformal_factor(ms: &MassSystem, p: &ChartPoint) -> Result<f64> {
    Ok(2.0 * scale_free_potential(ms, p)?)
}

/// Pushed-down JM metric `2Ũ g_FS` on the chart.
///
/// For three bodies this is `8γμ² |dw|² / w₃²` written in the chart.
pub fn jm_metric_chart(ms: &MassSystem, p: &ChartPoint) -> Result<DMatrix<f64>> {
    jm_metric_chart_for(ms, p, ChartPotential::Triples)
}

pub fn jm_metric_chart_for(ms: &MassSystem, p: &ChartPoint, pot: ChartPotential) -> Result<DMatrix<f64>> {
    if p.n_bodies != ms.len() {
        return Err(Error::Usage(format!(
            "chart point has {} bodies but the mass system has {}",
            p.n_bodies,
            ms.len()
        )));
    }
    Ok(fs_metric(p) * (2.0 * scale_free_potential_for(ms, p, pot)?))
}
