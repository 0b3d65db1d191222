//! Curvature by finite differences of a metric.
//!
//! The Gauss curvature of the hemisphere metric uses the conformal formula
//! `K = -e^{-2φ} Δφ` in a stereographic chart. Sectional curvatures of the
//! chart metrics come from the full Riemann tensor, with first and second
//! derivatives of `g` taken by central differences.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chart::{jm_metric_chart_for, ChartPoint, ChartPotential};
use super::jemisphere::conformal_factor;
use super::jm::{triple_inertia, triples};
use crate::error::{Error, Result};
use crate::nbody::{triangle_area, MassSystem, PlanarConfig, Vec2};
use crate::shape::ShapePoint;

/// Default finite-difference step relative to the local coordinate scale.
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-4;

/// Smallest angle, in the metric, accepted between the two plane vectors.
const MIN_PLANE_ANGLE: f64 = 1e-6;

/// Gauss curvature of `scale · |dw|² / w₃²` on the sphere through `w`.
///
/// The metric is written in the stereographic chart `x = (w₁, w₂)/(R + |w₃|)`,
/// where it is conformal to `|dx|²`, and `Δφ` is taken with a five-point
/// fourth-order stencil. Lower-hemisphere points are reflected first.
pub fn gauss_curvature_shape_sphere(w: &ShapePoint, scale: f64) -> Result<f64> {
    let radius = w.norm();
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::DegenerateShape);
    }
    if !(w.w3.abs() > 1e-12 * radius) {
        return Err(Error::Domain(format!("w3 = {} is on the equator", w.w3)));
    }
    if !(scale > 0.0) {
        return Err(Error::Usage(format!("scale must be positive, got {scale}")));
    }
    let denom = radius + w.w3.abs();
    let x0 = [w.w1 / denom, w.w2 / denom];
    let rho = x0[0].hypot(x0[1]);
    let h = 1e-3 * (1.0 - rho);

    // φ = ½ log of the conformal factor relative to |dx|²
    let phi = |x: [f64; 2]| -> Result<f64> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let on_sphere = ShapePoint::new(
            2.0 * radius * x[0] / (1.0 + r2),
            2.0 * radius * x[1] / (1.0 + r2),
            radius * (1.0 - r2) / (1.0 + r2),
        );
        let round = 4.0 * radius * radius / ((1.0 + r2) * (1.0 + r2));
        Ok(0.5 * (round * conformal_factor(&on_sphere, scale)?).ln())
    };
    let centre = phi(x0)?;
    let mut laplacian = 0.0;
    for axis in 0..2 {
        let at = |k: f64| {
            let mut x = x0;
            x[axis] += k * h;
            phi(x)
        };
        let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        laplacian += (-m2 + 16.0 * m1 - 30.0 * centre + 16.0 * p1 - p2) / (12.0 * h * h);
    }
    Ok(-(-2.0 * centre).exp() * laplacian)
}

/// Covariant Riemann tensor `R_{abcd}` of a metric field at `x`, with the
/// sign convention in which the round sphere has `R(X,Y,X,Y) > 0`.
pub fn riemann_tensor<G>(metric: G, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let d = x.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in shifts {
            y[i] += s * h;
        }
        metric(&y)
    };
    let g = at(&[])?;
    let g_inv = g.clone().try_inverse().ok_or_else(|| Error::Domain("metric is singular".into()))?;

    // dg[c] = ∂_c g ; ddg[c * d + e] = ∂_c ∂_e g
    let mut dg = Vec::with_capacity(d);
    let mut plus = Vec::with_capacity(d);
    let mut minus = Vec::with_capacity(d);
    for c in 0..d {
        let p = at(&[(c, 1.0)])?;
        let m = at(&[(c, -1.0)])?;
        dg.push((&p - &m) / (2.0 * h));
        plus.push(p);
        minus.push(m);
    }
    let mut ddg = vec![DMatrix::<f64>::zeros(d, d); d * d];
    for c in 0..d {
        ddg[c * d + c] = (&plus[c] - &g * 2.0 + &minus[c]) / (h * h);
        for e in c + 1..d {
            let pp = at(&[(c, 1.0), (e, 1.0)])?;
            let pm = at(&[(c, 1.0), (e, -1.0)])?;
            let mp = at(&[(c, -1.0), (e, 1.0)])?;
            let mm = at(&[(c, -1.0), (e, -1.0)])?;
            let mixed = (pp - pm - mp + mm) / (4.0 * h * h);
            ddg[e * d + c] = mixed.clone();
            ddg[c * d + e] = mixed;
        }
    }

    // Γ^e_{bc} = ½ g^{ef} (∂_b g_fc + ∂_c g_fb - ∂_f g_bc)
    let mut gamma = vec![0.0; d * d * d];
    for b in 0..d {
        for c in 0..d {
            for e in 0..d {
                let mut acc = 0.0;
                for f in 0..d {
                    acc += g_inv[(e, f)] * (dg[b][(f, c)] + dg[c][(f, b)] - dg[f][(b, c)]);
                }
                gamma[(e * d + b) * d + c] = 0.5 * acc;
            }
        }
    }
    let gam = |e: usize, b: usize, c: usize| gamma[(e * d + b) * d + c];
    let dd = |i: usize, j: usize, a: usize, b: usize| ddg[i * d + j][(a, b)];

    let mut r = vec![0.0; d * d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let mut val = 0.5 * (dd(b, c, a, e) + dd(a, e, b, c) - dd(a, c, b, e) - dd(b, e, a, c));
                    for p in 0..d {
                        for q in 0..d {
                            val += g[(p, q)] * (gam(p, b, c) * gam(q, a, e) - gam(p, b, e) * gam(q, a, c));
                        }
                    }
                    r[((a * d + b) * d + c) * d + e] = val;
                }
            }
        }
    }
    Ok(r)
}

fn quad(g: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for a in 0..x.len() {
        for b in 0..y.len() {
            acc += g[(a, b)] * x[a] * y[b];
        }
    }
    acc
}

/// Sectional curvature of the plane spanned by `x` and `y` for a metric
/// field, `R(X,Y,X,Y) / (|X|²|Y|² - ⟨X,Y⟩²)`.
pub fn sectional_of<G>(metric: G, p: &[f64], x: &[f64], y: &[f64], h: f64) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let d = p.len();
    let g = metric(p)?;
    let r = riemann_tensor(metric, p, h)?;
    let mut num = 0.0;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    num += r[((a * d + b) * d + c) * d + e] * x[a] * y[b] * x[c] * y[e];
                }
            }
        }
    }
    let area2 = quad(&g, x, x) * quad(&g, y, y) - quad(&g, x, y).powi(2);
    Ok(num / area2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: ChartPoint,
    /// Metric-orthonormal basis of the 2-plane.
    pub plane: [Vec<f64>; 2],
    pub sectional_curvature: f64,
    /// Absolute finite-difference step used.
    pub step: f64,
    /// `|K(h) - K(h/2)|`.
    pub error_estimate: f64,
}

impl CurvatureSample {
    /// `+1` or `-1` when `|K|` exceeds the refinement error, else `0`.
    pub fn resolved_sign(&self) -> i8 {
        if self.sectional_curvature.abs() > self.error_estimate {
            self.sectional_curvature.signum() as i8
        } else {
            0
        }
    }
}

/// Coordinate scale at which the chart metric changes appreciably: the
/// chart stretch `1 + |ζ|²` times the scale-free distance to the singular
/// set (smallest `|Δ|/I` over triples, or smallest pair distance at `I = 1`).
pub fn local_scale(ms: &MassSystem, p: &ChartPoint, pot: ChartPotential) -> Result<f64> {
    let q = p.to_configuration(ms)?;
    let stretch = 1.0 + p.coords.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let pts = q.points();
    let mut closest = 1.0_f64;
    match pot {
        ChartPotential::Triples => {
            for t in triples(pts.len()) {
                let inertia = triple_inertia(ms.masses(), pts, t);
                let ratio = triangle_area(&pts[t[0]], &pts[t[1]], &pts[t[2]]).abs() / inertia;
                closest = closest.min(ratio);
            }
        }
        ChartPotential::StrongForce => {
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    closest = closest.min((pts[a] - pts[b]).norm());
                }
            }
        }
    }
    Ok(stretch * closest)
}

/// Sectional curvature of the pushed-down JM metric at `p` on the plane
/// spanned by `x`, `y` (real chart components). `h` is relative to
/// [`local_scale`]; the value at `h` is reported together with its
/// difference from the value at `h/2`.
pub fn sectional_curvature(ms: &MassSystem, p: &ChartPoint, x: &[f64], y: &[f64], h: f64) -> Result<CurvatureSample> {
    sectional_curvature_for(ms, p, x, y, h, ChartPotential::Triples)
}

/// [`sectional_curvature`] for the JM metric of another potential.
pub fn sectional_curvature_for(
    ms: &MassSystem,
    p: &ChartPoint,
    x: &[f64],
    y: &[f64],
    h: f64,
    pot: ChartPotential,
) -> Result<CurvatureSample> {
    let d = p.dim();
    if x.len() != d || y.len() != d {
        return Err(Error::Usage(format!("plane vectors must have {d} components")));
    }
    if !(h > 0.0) {
        return Err(Error::Usage(format!("step must be positive, got {h}")));
    }
    let g = jm_metric_chart_for(ms, p, pot)?;
    let (xx, yy, xy) = (quad(&g, x, x), quad(&g, y, y), quad(&g, x, y));
    let cos = (xy / (xx * yy).sqrt()).clamp(-1.0, 1.0);
    let angle = cos.abs().acos();
    if !(xx > 0.0 && yy > 0.0) || !(angle >= MIN_PLANE_ANGLE) {
        return Err(Error::DegeneratePlane { angle: if angle.is_nan() { 0.0 } else { angle } });
    }
    let e1: Vec<f64> = x.iter().map(|v| v / xx.sqrt()).collect();
    let proj = quad(&g, y, &e1);
    let rest: Vec<f64> = y.iter().zip(&e1).map(|(a, b)| a - proj * b).collect();
    let norm = quad(&g, &rest, &rest).sqrt();
    let e2: Vec<f64> = rest.iter().map(|v| v / norm).collect();

    let step = h * local_scale(ms, p, pot)?;
    let n = p.n_bodies;
    let metric = |z: &[f64]| jm_metric_chart_for(ms, &ChartPoint::from_real(n, z)?, pot);
    let base = p.to_real();
    let k = sectional_of(metric, &base, &e1, &e2, step)?;
    let k_half = sectional_of(metric, &base, &e1, &e2, 0.5 * step)?;
    Ok(CurvatureSample {
        point: p.clone(),
        plane: [e1, e2],
        sectional_curvature: k,
        step,
        error_estimate: (k - k_half).abs(),
    })
}

/// Gaussian cm-frame configuration of `n` bodies (centered with the masses).
pub(crate) fn gaussian_configuration(ms: &MassSystem, rng: &mut ChaCha8Rng) -> PlanarConfig {
    let pts: Vec<Vec2> =
        (0..ms.len()).map(|_| Vec2::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let q = PlanarConfig(pts);
    let c = q.center_of_mass(ms);
    q.translated(-c)
}

/// `n_samples` independent (point, plane) samples: points from centered
/// Gaussian configurations, planes from Gaussian chart vectors. Sample `i`
/// uses stream `i` of the ChaCha generator seeded with `seed`, so the
/// result does not depend on the thread count.
pub fn curvature_survey(
    ms: &MassSystem,
    pot: ChartPotential,
    n_samples: usize,
    seed: u64,
    h: f64,
) -> Result<Vec<CurvatureSample>> {
    if ms.len() < 3 {
        return Err(Error::Usage("curvature survey needs at least 3 bodies".into()));
    }
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            loop {
                let q = gaussian_configuration(ms, &mut rng);
                let p = match ChartPoint::from_configuration(ms, &q) {
                    Ok(p) => p,
                    Err(Error::Chart) => continue,
                    Err(e) => return Err(e),
                };
                let d = p.dim();
                let x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let y: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                match sectional_curvature_for(ms, &p, &x, &y, h, pot) {
                    Err(Error::CollinearTriple { .. } | Error::Collision { .. } | Error::DegeneratePlane { .. }) => {
                        continue
                    }
                    other => return other,
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub samples: usize,
    pub positive: usize,
    pub negative: usize,
    pub unresolved: usize,
    pub min: f64,
    pub max: f64,
    pub max_error: f64,
}

pub fn summarize(samples: &[CurvatureSample]) -> SurveySummary {
    let mut s = SurveySummary {
        samples: samples.len(),
        positive: 0,
        negative: 0,
        unresolved: 0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        max_error: 0.0,
    };
    for c in samples {
        match c.resolved_sign() {
            1 => s.positive += 1,
            -1 => s.negative += 1,
            _ => s.unresolved += 1,
        }
        s.min = s.min.min(c.sectional_curvature);
        s.max = s.max.max(c.sectional_curvature);
        s.max_error = s.max_error.max(c.error_estimate);
    }
    s
}
