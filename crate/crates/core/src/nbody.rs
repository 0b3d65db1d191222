//! Configuration-space quantities: mass inner product, moment of inertia,
//! signed area, the potential `V = -γ I / Δ²` with its analytic gradient, and
//! the Galilean conserved quantities.
//!
//! Newton's law is read as `m_a q̈_a = -∂V/∂q_a` with the plain partial
//! gradient.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// A configuration is on the collinear locus when `|Δ| < SINGULAR_TOLERANCE * I`.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Planar cross product `a × b = a_x b_y - a_y b_x`.
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Rotation by +90°, i.e. multiplication by `i` in `ℂ`.
#[inline]
pub fn rot90(a: &Vec2) -> Vec2 {
    Vec2::new(-a.y, a.x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSystem {
    masses: Vec<f64>,
    gamma: f64,
}

impl MassSystem {
    pub fn new(masses: Vec<f64>, gamma: f64) -> Result<Self> {
        if masses.len() < 3 {
            return Err(Error::Usage(format!("need at least 3 bodies, got {}", masses.len())));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Usage(format!("masses must be positive, got {m}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Usage(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self { masses, gamma })
    }

    /// `n` unit masses.
    pub fn equal(n: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![1.0; n], gamma)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `μ² = m₁m₂m₃ / M`; only defined for three bodies.
    pub fn mu_squared(&self) -> Result<f64> {
        self.require_three()?;
        let m = &self.masses;
        Ok(m[0] * m[1] * m[2] / self.total_mass())
    }

    pub fn mu(&self) -> Result<f64> {
        self.mu_squared().map(f64::sqrt)
    }

    /// Constant `8γμ²` of the pushed-down metric `8γμ² |dw|² / w₃²`.
    pub fn reduced_metric_scale(&self) -> Result<f64> {
        Ok(8.0 * self.gamma * self.mu_squared()?)
    }

    pub(crate) fn require_three(&self) -> Result<()> {
        if self.len() == 3 {
            Ok(())
        } else {
            Err(Error::Usage(format!("operation is defined for 3 bodies, mass system has {}", self.len())))
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n == self.len() {
            Ok(())
        } else {
            Err(Error::Usage(format!("expected {} bodies, got {n}", self.len())))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarConfig(pub Vec<Vec2>);

impl PlanarConfig {
    pub fn new(points: Vec<Vec2>) -> Self {
        Self(points)
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Self {
        Self(xy.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|p| p.x.is_finite() && p.y.is_finite())
    }

    pub fn translated(&self, c: Vec2) -> Self {
        Self(self.0.iter().map(|p| p + c).collect())
    }

    /// Rotation about the origin by `theta`.
    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(self.0.iter().map(|p| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y)).collect())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self(self.0.iter().map(|p| p * lambda).collect())
    }

    /// Mirror image in the x-axis.
    pub fn reflected(&self) -> Self {
        Self(self.0.iter().map(|p| Vec2::new(p.x, -p.y)).collect())
    }

    pub fn center_of_mass(&self, ms: &MassSystem) -> Vec2 {
        weighted_mean(ms.masses(), &self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: PlanarConfig,
    pub v: Vec<Vec2>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: PlanarConfig, v: Vec<Vec2>, t: f64) -> Result<Self> {
        if q.len() != v.len() {
            return Err(Error::Usage(format!("{} positions but {} velocities", q.len(), v.len())));
        }
        Ok(Self { q, v, t })
    }

    pub fn at_rest(q: PlanarConfig) -> Self {
        let v = vec![Vec2::zeros(); q.len()];
        Self { q, v, t: 0.0 }
    }
}

/// Energy, momenta and size of a phase state.
///
/// `potential` and `energy` are `None` when the configuration is collinear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedSet {
    pub energy: Option<f64>,
    pub kinetic: f64,
    pub potential: Option<f64>,
    pub momentum: Vec2,
    pub angular_momentum: f64,
    pub inertia_rate: f64,
    pub inertia: f64,
}

fn weighted_mean(masses: &[f64], pts: &[Vec2]) -> Vec2 {
    let total: f64 = masses.iter().sum();
    masses.iter().zip(pts).fold(Vec2::zeros(), |acc, (m, p)| acc + p * *m) / total
}

/// `⟨a, b⟩ = Σ m_a a_a · b_a`.
pub fn mass_inner(ms: &MassSystem, a: &[Vec2], b: &[Vec2]) -> Result<f64> {
    ms.check_len(a.len())?;
    ms.check_len(b.len())?;
    Ok(ms.masses().iter().zip(a.iter().zip(b)).map(|(m, (x, y))| m * x.dot(y)).sum())
}

/// Moment of inertia about the center of mass, `Σ_{a<b} m_a m_b r_ab² / M`.
pub fn moment_of_inertia(ms: &MassSystem, q: &PlanarConfig) -> f64 {
    let m = ms.masses();
    let p = q.points();
    let mut acc = 0.0;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            acc += m[a] * m[b] * (p[a] - p[b]).norm_squared();
        }
    }
    acc / ms.total_mass()
}

/// Signed area of the triangle `(a, b, c)`, positive when counter-clockwise.
#[inline]
pub fn triangle_area(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    0.5 * cross(&(b - a), &(c - a))
}

/// Signed area of a three-point configuration.
pub fn signed_area(q: &PlanarConfig) -> Result<f64> {
    match q.points() {
        [a, b, c] => Ok(triangle_area(a, b, c)),
        p => Err(Error::Usage(format!("signed area needs exactly 3 points, got {}", p.len()))),
    }
}

/// `Δ / I`, the scale-free collinearity measure, checked against [`SINGULAR_TOLERANCE`].
fn area_and_inertia(ms: &MassSystem, q: &PlanarConfig) -> Result<(f64, f64)> {
    ms.require_three()?;
    ms.check_len(q.len())?;
    let area = signed_area(q)?;
    let inertia = moment_of_inertia(ms, q);
    if !(area.abs() >= SINGULAR_TOLERANCE * inertia) || inertia == 0.0 {
        return Err(Error::SingularConfiguration { ratio: if inertia > 0.0 { area.abs() / inertia } else { 0.0 } });
    }
    Ok((area, inertia))
}

/// `V(q) = -γ I(q) / Δ(q)²` for three bodies.
pub fn potential(ms: &MassSystem, q: &PlanarConfig) -> Result<f64> {
    let (area, inertia) = area_and_inertia(ms, q)?;
    Ok(-ms.gamma() * (inertia / (area * area)))
}

/// Analytic partial gradient `∂V/∂q_a` for each body.
pub fn potential_gradient(ms: &MassSystem, q: &PlanarConfig) -> Result<Vec<Vec2>> {
    let (area, inertia) = area_and_inertia(ms, q)?;
    let p = q.points();
    let cm = q.center_of_mass(ms);
    let inv2 = 1.0 / (area * area);
    let inv3 = inv2 / area;
    let gamma = ms.gamma();
    Ok((0..3)
        .map(|a| {
            let next = &p[(a + 1) % 3];
            let prev = &p[(a + 2) % 3];
            // ∂Δ/∂q_a = ½ rot(-90°)(q_{a+1} - q_{a-1})
            let d = next - prev;
            let grad_area = Vec2::new(0.5 * d.y, -0.5 * d.x);
            let grad_inertia = (p[a] - cm) * (2.0 * ms.masses()[a]);
            -(grad_inertia * inv2 - grad_area * (2.0 * inertia * inv3)) * gamma
        })
        .collect())
}

/// Shift positions and velocities so the center of mass is at rest at the origin.
pub fn to_center_of_mass(ms: &MassSystem, s: &PhaseState) -> PhaseState {
    let cq = weighted_mean(ms.masses(), s.q.points());
    let cv = weighted_mean(ms.masses(), &s.v);
    PhaseState { q: s.q.translated(-cq), v: s.v.iter().map(|v| v - cv).collect(), t: s.t }
}

pub fn conserved_quantities(ms: &MassSystem, s: &PhaseState) -> Result<ConservedSet> {
    ms.check_len(s.q.len())?;
    ms.check_len(s.v.len())?;
    let m = ms.masses();
    let kinetic = 0.5 * mass_inner(ms, &s.v, &s.v)?;
    let momentum = m.iter().zip(&s.v).fold(Vec2::zeros(), |acc, (m, v)| acc + v * *m);
    let angular_momentum = m.iter().zip(s.q.points().iter().zip(&s.v)).map(|(m, (q, v))| m * cross(q, v)).sum();
    let cm = s.q.center_of_mass(ms);
    let centered: Vec<Vec2> = s.q.points().iter().map(|q| q - cm).collect();
    let inertia_rate = 2.0 * mass_inner(ms, &centered, &s.v)?;
    let inertia = moment_of_inertia(ms, &s.q);
    let potential = if ms.len() == 3 { potential(ms, &s.q).ok() } else { crate::geometry::vn_potential(ms, &s.q).ok() };
    Ok(ConservedSet {
        energy: potential.map(|v| kinetic + v),
        kinetic,
        potential,
        momentum,
        angular_momentum,
        inertia_rate,
        inertia,
    })
}
