//! Hemisphere model of the hyperbolic plane on the shape sphere.
//!
//! Geodesics of `|dw|² / w₃²` on a hemisphere `|w| = R, w₃ ≠ 0` are the arcs
//! cut out by vertical planes `A w₁ + B w₂ = C`. Vertical projection onto
//! the disc `|(w₁, w₂)| < R` turns them into chords of the Klein model.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::{KleinPoint, ShapePoint};

/// Relative tolerance for "same sphere" checks on input shapes.
const SPHERE_TOL: f64 = 1e-6;

/// `scale · Id / w₃²`, to be restricted to the tangent plane of the sphere.
pub fn jemisphere_metric(w: &ShapePoint, scale: f64) -> Result<Matrix3<f64>> {
    Ok(Matrix3::identity() * conformal_factor(w, scale)?)
}

/// The factor `scale / w₃²` of the hemisphere metric.
pub fn conformal_factor(w: &ShapePoint, scale: f64) -> Result<f64> {
    if !(w.w3 != 0.0 && w.w3.is_finite()) {
        return Err(Error::Domain("hemisphere metric is undefined on the equator w3 = 0".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::Usage(format!("scale must be positive, got {scale}")));
    }
    Ok(scale / (w.w3 * w.w3))
}

/// Hyperbolic distance between two points of the same hemisphere in the
/// metric `|dw|² / w₃²`: `cosh d = 1 + |a - b|² / (2 a₃ b₃)`.
pub fn hyperbolic_distance(a: &ShapePoint, b: &ShapePoint) -> f64 {
    let chord = a.distance(b);
    2.0 * (chord / (2.0 * (a.w3 * b.w3).abs().sqrt())).asinh()
}

/// Distance in the Klein disc model by the cross-ratio formula
/// `½ log(|v - p| |u - q| / (|u - p| |v - q|))`, where `p, q` are the ends of
/// the chord through `u` and `v`.
pub fn klein_distance(u: &KleinPoint, v: &KleinPoint) -> f64 {
    let d = [v.u1 - u.u1, v.u2 - u.u2];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return 0.0;
    }
    // u + s d hits the unit circle at s = s_minus < 0 < 1 < s_plus
    let b = u.u1 * d[0] + u.u2 * d[1];
    let c = u.u1 * u.u1 + u.u2 * u.u2 - 1.0;
    let disc = (b * b - len2 * c).sqrt();
    let s_minus = (-b - disc) / len2;
    let s_plus = (-b + disc) / len2;
    // |u - p| ∝ -s_minus, |v - p| ∝ 1 - s_minus, |u - q| ∝ s_plus, |v - q| ∝ s_plus - 1
    0.5 * (((1.0 - s_minus) * s_plus) / ((-s_minus) * (s_plus - 1.0))).ln()
}

/// Length of a sampled curve in `scale · |dw|² / w₃²` (midpoint rule).
pub fn hyperbolic_length(curve: &[ShapePoint], scale: f64) -> f64 {
    curve
        .windows(2)
        .map(|p| {
            let mid = 0.5 * (p[0].w3 + p[1].w3);
            p[0].distance(&p[1]) / mid.abs()
        })
        .sum::<f64>()
        * scale.sqrt()
}

/// `n ≥ 2` points spaced evenly in hyperbolic arc length along a sampled
/// curve, linearly interpolated between its vertices.
pub fn resample_by_arc_length(curve: &[ShapePoint], n: usize) -> Vec<ShapePoint> {
    if curve.len() < 2 {
        return curve.to_vec();
    }
    let mut cumulative = vec![0.0];
    for pair in curve.windows(2) {
        let last = *cumulative.last().expect("non-empty");
        cumulative.push(last + hyperbolic_length(pair, 1.0));
    }
    let total = *cumulative.last().expect("non-empty");
    let n = n.max(2);
    let mut seg = 0;
    (0..n)
        .map(|i| {
            let s = total * i as f64 / (n - 1) as f64;
            while seg + 2 < cumulative.len() && cumulative[seg + 1] < s {
                seg += 1;
            }
            let span = cumulative[seg + 1] - cumulative[seg];
            let f = if span > 0.0 { ((s - cumulative[seg]) / span).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (&curve[seg], &curve[seg + 1]);
            ShapePoint::new(a.w1 + f * (b.w1 - a.w1), a.w2 + f * (b.w2 - a.w2), a.w3 + f * (b.w3 - a.w3))
        })
        .collect()
}

/// Vertical plane `A w₁ + B w₂ = C` with `A² + B² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub max_residual: f64,
    pub rms_residual: f64,
}

impl PlaneFit {
    pub fn residual(&self, w: &ShapePoint) -> f64 {
        self.a * w.w1 + self.b * w.w2 - self.c
    }
}

/// Total-least-squares vertical plane through the horizontal projections of
/// `curve`: the normal `(A, B)` is the smallest right singular vector of the
/// centered `n × 2` data matrix.
pub fn fit_vertical_plane(curve: &[ShapePoint]) -> Result<PlaneFit> {
    if curve.len() < 3 {
        return Err(Error::Usage(format!("plane fit needs at least 3 points, got {}", curve.len())));
    }
    let n = curve.len() as f64;
    let m1 = curve.iter().map(|w| w.w1).sum::<f64>() / n;
    let m2 = curve.iter().map(|w| w.w2).sum::<f64>() / n;
    let data = DMatrix::from_fn(curve.len(), 2, |i, j| if j == 0 { curve[i].w1 - m1 } else { curve[i].w2 - m2 });
    let spread = data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let size = curve.iter().fold(0.0_f64, |acc, w| acc.max(w.norm()));
    if !(spread > 1e-14 * size) {
        return Err(Error::DegenerateFit);
    }
    let svd = data.svd(false, true);
    let vt = svd.v_t.ok_or(Error::DegenerateFit)?;
    let sv = &svd.singular_values;
    let k = if sv[0] <= sv[1] { 0 } else { 1 };
    let (mut a, mut b) = (vt[(k, 0)], vt[(k, 1)]);
    let norm = a.hypot(b);
    a /= norm;
    b /= norm;
    let mut c = a * m1 + b * m2;
    // fix the overall sign so repeated fits agree
    if c < 0.0 || (c == 0.0 && (a < 0.0 || (a == 0.0 && b < 0.0))) {
        a = -a;
        b = -b;
        c = -c;
    }
    let mut fit = PlaneFit { a, b, c, max_residual: 0.0, rms_residual: 0.0 };
    let mut sq = 0.0;
    for w in curve {
        let r = fit.residual(w).abs();
        fit.max_residual = fit.max_residual.max(r);
        sq += r * r;
    }
    fit.rms_residual = (sq / n).sqrt();
    Ok(fit)
}

/// Closed-form hemisphere geodesic between two shapes on a common sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicArc {
    /// Unit normal `(A, B)` and offset `C` of the vertical plane.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Sphere radius `|w|`.
    pub radius: f64,
    /// `+1` for the upper hemisphere, `-1` for the lower.
    pub hemisphere: f64,
    /// Circle parameters of the two endpoints, both in `(0, π)`.
    pub alpha_start: f64,
    pub alpha_end: f64,
}

impl GeodesicArc {
    pub fn through(wa: &ShapePoint, wb: &ShapePoint) -> Result<Self> {
        let radius = wa.norm();
        if !(radius > 0.0) {
            return Err(Error::DegenerateShape);
        }
        if (wb.norm() - radius).abs() > SPHERE_TOL * radius {
            return Err(Error::Domain(format!(
                "endpoints lie on different spheres (|wa| = {radius}, |wb| = {})",
                wb.norm()
            )));
        }
        if wa.w3 == 0.0 || wb.w3 == 0.0 || wa.w3.signum() != wb.w3.signum() {
            return Err(Error::Domain("endpoints must lie in the same open hemisphere".into()));
        }
        let d = [wb.w1 - wa.w1, wb.w2 - wa.w2];
        let len = d[0].hypot(d[1]);
        if !(len > 1e-12 * radius) {
            return Err(Error::AmbiguousPlane);
        }
        let (a, b) = (-d[1] / len, d[0] / len);
        let c = a * wa.w1 + b * wa.w2;
        let mut arc = Self { a, b, c, radius, hemisphere: wa.w3.signum(), alpha_start: 0.0, alpha_end: 0.0 };
        arc.alpha_start = arc.parameter_of(wa);
        arc.alpha_end = arc.parameter_of(wb);
        Ok(arc)
    }

    /// Radius of the circle cut from the sphere by the plane.
    pub fn circle_radius(&self) -> f64 {
        (self.radius * self.radius - self.c * self.c).max(0.0).sqrt()
    }

    /// Angle of the projection of `w` onto the circle, measured from the
    /// horizontal direction `(-B, A)`.
    pub fn parameter_of(&self, w: &ShapePoint) -> f64 {
        let along = -self.b * w.w1 + self.a * w.w2;
        (self.hemisphere * w.w3).atan2(along)
    }

    pub fn point(&self, alpha: f64) -> ShapePoint {
        let rho = self.circle_radius();
        let (s, c) = alpha.sin_cos();
        ShapePoint::new(
            self.c * self.a - rho * c * self.b,
            self.c * self.b + rho * c * self.a,
            self.hemisphere * rho * s,
        )
    }

    /// `n ≥ 2` points equally spaced in the circle parameter, endpoints included.
    pub fn sample(&self, n: usize) -> Vec<ShapePoint> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                self.point(self.alpha_start + s * (self.alpha_end - self.alpha_start))
            })
            .collect()
    }

    /// Euclidean distance from `w` to the arc.
    pub fn distance_to(&self, w: &ShapePoint) -> f64 {
        let lo = self.alpha_start.min(self.alpha_end);
        let hi = self.alpha_start.max(self.alpha_end);
        let alpha = self.parameter_of(w).clamp(lo, hi);
        self.point(alpha).distance(w)
    }

    /// Point at hyperbolic distance `s` from the start, moving toward the end.
    pub fn point_at_distance(&self, s: f64) -> ShapePoint {
        let start = self.point(self.alpha_start);
        let (mut lo, mut hi) = (self.alpha_start, self.alpha_end);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hyperbolic_distance(&start, &self.point(mid)) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.point(0.5 * (lo + hi))
    }

    pub fn length(&self) -> f64 {
        hyperbolic_distance(&self.point(self.alpha_start), &self.point(self.alpha_end))
    }
}

/// `n_samples` points along the hemisphere geodesic from `wa` to `wb`.
pub fn jemisphere_geodesic(wa: &ShapePoint, wb: &ShapePoint, n_samples: usize) -> Result<Vec<ShapePoint>> {
    Ok(GeodesicArc::through(wa, wb)?.sample(n_samples))
}

fn segment_distance(p: &ShapePoint, a: &ShapePoint, b: &ShapePoint) -> f64 {
    let ab = [b.w1 - a.w1, b.w2 - a.w2, b.w3 - a.w3];
    let ap = [p.w1 - a.w1, p.w2 - a.w2, p.w3 - a.w3];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = if len2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let proj = ShapePoint::new(a.w1 + t * ab[0], a.w2 + t * ab[1], a.w3 + t * ab[2]);
    p.distance(&proj)
}

fn directed_hausdorff(from: &[ShapePoint], to: &[ShapePoint]) -> f64 {
    from.iter()
        .map(|p| {
            if to.len() == 1 {
                return p.distance(&to[0]);
            }
            to.windows(2).map(|s| segment_distance(p, &s[0], &s[1])).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two polylines (vertices of each
/// measured against the segments of the other).
pub fn hausdorff_distance(a: &[ShapePoint], b: &[ShapePoint]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
