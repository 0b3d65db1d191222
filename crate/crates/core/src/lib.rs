//! Planar N-body laboratory for the potential `-γ I / Δ²`.
//!
//! The zero-energy, zero-momentum, constant-size flow of the three-body
//! problem with this potential projects onto geodesics of the hemisphere
//! model of the hyperbolic plane. This crate provides the pieces needed to
//! check that numerically and to explore the N-body analogue:
//!
//! * [`nbody`]: mass inner product, moment of inertia, signed area, the
//!   potential with its analytic gradient, and the conserved quantities.
//! * [`shape`]: Jacobi coordinates, the Hopf map onto shape space, lifting
//!   shapes back to configurations, and the Klein / hemisphere correspondence.
//! * [`dynamics`]: initial conditions on `H = P = J = İ = 0`, an adaptive
//!   DOP853 integrator, and trajectory diagnostics.
//! * [`geometry`]: Jacobi-Maupertuis lengths, hemisphere geodesics, vertical
//!   plane fits, Gauss and sectional curvature by finite differences.
//! * [`topology`]: triple-orientation sign vectors and the Monte Carlo census
//!   of generic N-gon chambers.

// `!(x > 0.0)` is deliberate: it also rejects NaN. Index loops mirror the tableau formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod nbody;
pub mod shape;
pub mod topology;

pub use error::{Error, Result};
pub use nbody::{MassSystem, PhaseState, PlanarConfig, Vec2};
pub use shape::{KleinPoint, ShapePoint};
