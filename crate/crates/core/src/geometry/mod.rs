//! Jacobi-Maupertuis geometry of the reduced problem.
//!
//! For three bodies the zero-energy JM metric `2U |dq|²` pushes down to
//! `8γμ² |dw|² / w₃²` on the shape sphere, a constant multiple of the
//! hemisphere model of the hyperbolic plane. For `N` bodies the potential is
//! summed over triples and the pushed-down metric is `2Ũ g_FS` on affine
//! charts of `CP^{N-2}`, with `Ũ = I·U` the scale-free potential.

pub mod chart;
pub mod curvature;
pub mod jemisphere;
pub mod jm;

pub use chart::{jm_metric_chart, jm_metric_chart_for, ChartPoint, ChartPotential};
pub use curvature::{gauss_curvature_shape_sphere, sectional_curvature, CurvatureSample};
pub use jemisphere::{
    fit_vertical_plane, hausdorff_distance, jemisphere_geodesic, jemisphere_metric, resample_by_arc_length,
    GeodesicArc, PlaneFit,
};
pub use jm::{jm_length, vn_potential};
