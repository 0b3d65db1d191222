//! Zero-energy, zero-momentum dynamics of the three-body problem.
//!
//! Initial conditions are drawn on the invariant set `H = P = J = İ = 0`,
//! Newton's equations `m_a q̈_a = -∂V/∂q_a` are integrated with
//! [`integrator::Dop853`], and the run stops when the shape gets within
//! `stop_ratio` of the collinear equator.

mod dop853_tableau;
pub mod integrator;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbody::{
    conserved_quantities, potential, potential_gradient, ConservedSet, MassSystem, PhaseState, PlanarConfig, Vec2,
};
use crate::shape::{from_jacobi_vectors, lift_to_jacobi, shape_project, ShapePoint};
use integrator::{Dop853, StepError, Tolerances};

/// Hard cap on accepted steps per side of a run.
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ICSpec {
    /// Moment of inertia of the start configuration.
    pub i0: f64,
    /// Start shape; only its direction matters, it is rescaled to `|w| = i0 / 2`.
    pub shape: ShapePoint,
    /// Direction in the two-dimensional space of horizontal velocities.
    pub theta: f64,
}

impl ICSpec {
    /// Equilateral start shape with unit moment of inertia.
    pub fn equilateral(theta: f64) -> Self {
        Self { i0: 1.0, shape: ShapePoint::new(0.0, 0.0, 0.5), theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Stop once `|w₃| / |w|` drops below this.
    pub stop_ratio: f64,
    /// Maximum elapsed physical time per side.
    pub max_time: f64,
    /// Integrate in `τ` with `dt = (Δ/Δ₀)² dτ` instead of physical time.
    pub time_rescaling: bool,
    pub direction: Direction,
    /// Extra samples from the continuous extension inserted inside each accepted step.
    pub dense_output: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 1.0,
            stop_ratio: 1e-2,
            max_time: 100.0,
            time_rescaling: false,
            direction: Direction::Both,
            dense_output: 0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::Usage(format!("{name} must be positive and finite, got {x}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("max_time", self.max_time)?;
        if !(self.max_step > 0.0) {
            return Err(Error::Usage(format!("max_step must be positive, got {}", self.max_step)));
        }
        if !(self.stop_ratio > 0.0 && self.stop_ratio < 1.0) {
            return Err(Error::Usage(format!("stop_ratio must lie in (0, 1), got {}", self.stop_ratio)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `|w₃| / |w|` dropped below the stop ratio.
    ReachedStopRatio,
    MaxTime,
    StepFailure,
    /// This side of the run was not integrated.
    NotIntegrated,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::ReachedStopRatio => "reached_stop_ratio",
            Termination::MaxTime => "max_time",
            Termination::StepFailure => "step_failure",
            Termination::NotIntegrated => "not_integrated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: PhaseState,
    pub shape: ShapePoint,
    pub conserved: ConservedSet,
}

impl Sample {
    pub fn new(ms: &MassSystem, state: PhaseState) -> Result<Self> {
        let shape = shape_project(ms, &state.q)?;
        let conserved = conserved_quantities(ms, &state)?;
        if conserved.energy.is_none() {
            return Err(Error::SingularConfiguration { ratio: shape.collinearity_ratio() });
        }
        Ok(Self { state, shape, conserved })
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }

    /// Dimensionless residuals of the constraints `H = P = J = İ = 0`.
    ///
    /// Each quantity is divided by its Cauchy-Schwarz bound: `|V|` for `H`,
    /// `√(M⟨v,v⟩)` for `P`, `√(I⟨v,v⟩)` for `J` and `2√(I⟨v,v⟩)` for `İ`.
    pub fn scaled_residuals(&self, ms: &MassSystem) -> ScaledResiduals {
        let c = &self.conserved;
        let vv = 2.0 * c.kinetic;
        let iv = (c.inertia * vv).sqrt();
        let v = c.potential.unwrap_or(f64::NAN);
        ScaledResiduals {
            energy: c.energy.unwrap_or(f64::NAN).abs() / v.abs(),
            momentum: c.momentum.norm() / (ms.total_mass() * vv).sqrt(),
            angular_momentum: c.angular_momentum.abs() / iv,
            inertia_rate: c.inertia_rate.abs() / (2.0 * iv),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledResiduals {
    pub energy: f64,
    pub momentum: f64,
    pub angular_momentum: f64,
    pub inertia_rate: f64,
}

impl ScaledResiduals {
    pub fn max(&self) -> f64 {
        self.energy.max(self.momentum).max(self.angular_momentum).max(self.inertia_rate)
    }

    /// Component-wise maximum.
    pub fn merge(&self, o: &ScaledResiduals) -> ScaledResiduals {
        ScaledResiduals {
            energy: self.energy.max(o.energy),
            momentum: self.momentum.max(o.momentum),
            angular_momentum: self.angular_momentum.max(o.angular_momentum),
            inertia_rate: self.inertia_rate.max(o.inertia_rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Time-ordered samples; the initial state sits between the two sides.
    pub samples: Vec<Sample>,
    /// How the backward (earlier-time) side ended.
    pub start: Termination,
    /// How the forward side ended.
    pub end: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn shapes(&self) -> Vec<ShapePoint> {
        self.samples.iter().map(|s| s.shape).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::t).collect()
    }

    pub fn max_scaled_residuals(&self, ms: &MassSystem) -> ScaledResiduals {
        let zero = ScaledResiduals { energy: 0.0, momentum: 0.0, angular_momentum: 0.0, inertia_rate: 0.0 };
        self.samples.iter().fold(zero, |acc, s| acc.merge(&s.scaled_residuals(ms)))
    }

    /// Largest `|I(t) - i0| / i0` over the run.
    pub fn max_inertia_deviation(&self, i0: f64) -> f64 {
        self.samples.iter().map(|s| (s.conserved.inertia - i0).abs() / i0).fold(0.0, f64::max)
    }
}

fn perp_direction(z1: Complex64, z2: Complex64) -> (Complex64, Complex64) {
    (-z2.conj(), z1.conj())
}

/// Initial state on `H = P = J = İ = 0` (see [`sample_with_kinetic_factor`]).
pub fn sample_initial_conditions(ms: &MassSystem, spec: &ICSpec) -> Result<PhaseState> {
    sample_with_kinetic_factor(ms, spec, 1.0)
}

/// Initial state with `P = J = İ = 0` and kinetic energy `K = -factor · V`.
///
/// The configuration is the lift of the start shape. In Jacobi coordinates
/// the velocities orthogonal to both `z` and `iz` form the complex line
/// spanned by `(-z̄₂, z̄₁)`; `theta` picks the phase within that line.
pub fn sample_with_kinetic_factor(ms: &MassSystem, spec: &ICSpec, factor: f64) -> Result<PhaseState> {
    ms.require_three()?;
    if !(spec.i0.is_finite() && spec.i0 > 0.0) {
        return Err(Error::Usage(format!("I0 must be positive, got {}", spec.i0)));
    }
    if !spec.theta.is_finite() || !(factor >= 0.0) {
        return Err(Error::Usage("theta and kinetic factor must be finite".into()));
    }
    let w = spec.shape.with_norm(spec.i0 / 2.0);
    if !(w.collinearity_ratio() >= crate::nbody::SINGULAR_TOLERANCE) {
        return Err(Error::DegenerateStart(format!(
            "start shape ({}, {}, {}) has w3 = 0",
            spec.shape.w1, spec.shape.w2, spec.shape.w3
        )));
    }
    let z = lift_to_jacobi(&w)?;
    let q = PlanarConfig(from_jacobi_vectors(ms, &[z.z1, z.z2])?);
    let v = potential(ms, &q).map_err(|e| Error::DegenerateStart(e.to_string()))?;
    let speed = (-2.0 * factor * v).sqrt();
    let (p1, p2) = perp_direction(z.z1, z.z2);
    let norm = (p1.norm_sqr() + p2.norm_sqr()).sqrt();
    let phase = Complex64::from_polar(speed / norm, spec.theta);
    let vel = from_jacobi_vectors(ms, &[p1 * phase, p2 * phase])?;
    PhaseState::new(q, vel, 0.0)
}

fn pack(s: &PhaseState, rescaled: bool) -> Vec<f64> {
    let n = s.q.len();
    let mut y = Vec::with_capacity(4 * n + 1);
    for p in s.q.points() {
        y.extend([p.x, p.y]);
    }
    for v in &s.v {
        y.extend([v.x, v.y]);
    }
    if rescaled {
        y.push(s.t);
    }
    y
}

fn unpack(y: &[f64], n: usize, t: f64, rescaled: bool) -> PhaseState {
    let q = (0..n).map(|a| Vec2::new(y[2 * a], y[2 * a + 1])).collect();
    let v = (0..n).map(|a| Vec2::new(y[2 * n + 2 * a], y[2 * n + 2 * a + 1])).collect();
    let t = if rescaled { y[4 * n] } else { t };
    PhaseState { q: PlanarConfig(q), v, t }
}

/// Right-hand side `(q̇, v̇) = (v, -∇V/m)`, optionally multiplied by `(Δ/Δ₀)²`
/// with a trailing `dt/dτ` component. Singular points yield NaN so the step is rejected.
fn newton_rhs(ms: &MassSystem, rescaled: bool, area0: f64) -> impl FnMut(f64, &[f64], &mut [f64]) + '_ {
    let n = ms.len();
    move |_t, y, dy| {
        let q = PlanarConfig((0..n).map(|a| Vec2::new(y[2 * a], y[2 * a + 1])).collect());
        let grad = match potential_gradient(ms, &q) {
            Ok(g) => g,
            Err(_) => {
                dy.fill(f64::NAN);
                return;
            }
        };
        let factor = if rescaled {
            let area = crate::nbody::triangle_area(&q.0[0], &q.0[1], &q.0[2]) / area0;
            area * area
        } else {
            1.0
        };
        for a in 0..n {
            let m = ms.masses()[a];
            dy[2 * a] = factor * y[2 * n + 2 * a];
            dy[2 * a + 1] = factor * y[2 * n + 2 * a + 1];
            dy[2 * n + 2 * a] = -factor * grad[a].x / m;
            dy[2 * n + 2 * a + 1] = -factor * grad[a].y / m;
        }
        if rescaled {
            dy[4 * n] = factor;
        }
    }
}

fn run_side(
    ms: &MassSystem,
    s0: &PhaseState,
    cfg: &IntegratorConfig,
    direction: f64,
) -> Result<(Vec<Sample>, Termination)> {
    let n = ms.len();
    let rescaled = cfg.time_rescaling;
    let area0 = crate::nbody::signed_area(&s0.q)?;
    let rhs = newton_rhs(ms, rescaled, area0);
    let tol = Tolerances { rel: cfg.rel_tol, abs: cfg.abs_tol, max_step: cfg.max_step };
    let mut ig = Dop853::new(rhs, s0.t, pack(s0, rescaled), direction, tol);
    let mut samples = Vec::new();
    let mut buf = vec![0.0; ig.y().len()];
    for _ in 0..MAX_STEPS {
        if let Err(StepError::Underflow { t, h }) = ig.step() {
            log::debug!("step size underflow at t = {t}, h = {h:e}");
            return Ok((samples, Termination::StepFailure));
        }
        for j in 1..=cfg.dense_output {
            let theta = j as f64 / (cfg.dense_output + 1) as f64;
            let t = ig.interpolate(theta, &mut buf);
            if let Ok(s) = Sample::new(ms, unpack(&buf, n, t, rescaled)) {
                samples.push(s);
            }
        }
        let state = unpack(ig.y(), n, ig.t(), rescaled);
        let sample = match Sample::new(ms, state) {
            Ok(s) => s,
            Err(_) => return Ok((samples, Termination::StepFailure)),
        };
        let ratio = sample.shape.collinearity_ratio();
        let elapsed = (sample.t() - s0.t).abs();
        samples.push(sample);
        if ratio < cfg.stop_ratio {
            return Ok((samples, Termination::ReachedStopRatio));
        }
        if elapsed > cfg.max_time {
            return Ok((samples, Termination::MaxTime));
        }
    }
    Ok((samples, Termination::StepFailure))
}

/// Integrate Newton's equations from `s0` in the configured direction(s).
pub fn integrate(ms: &MassSystem, s0: &PhaseState, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    ms.require_three()?;
    ms.check_len(s0.q.len())?;
    ms.check_len(s0.v.len())?;
    potential(ms, &s0.q)?;
    let initial = Sample::new(ms, s0.clone())?;
    let (mut samples, start) = match cfg.direction {
        Direction::Backward | Direction::Both => {
            let (mut back, term) = run_side(ms, s0, cfg, -1.0)?;
            back.reverse();
            (back, term)
        }
        Direction::Forward => (Vec::new(), Termination::NotIntegrated),
    };
    samples.push(initial);
    let end = match cfg.direction {
        Direction::Forward | Direction::Both => {
            let (fwd, term) = run_side(ms, s0, cfg, 1.0)?;
            samples.extend(fwd);
            term
        }
        Direction::Backward => Termination::NotIntegrated,
    };
    Ok(Trajectory { samples, start, end })
}

/// Largest scaled mismatch `|Ï - 4H| / max(4|H|, 4 max(K, |V|))` over interior samples,
/// with `Ï` from a centered second difference on the (non-uniform) time grid.
pub fn lagrange_jacobi_check(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 5 {
        return Err(Error::Usage(format!("need at least 5 samples, trajectory has {}", traj.len())));
    }
    let s = &traj.samples;
    let mut worst: f64 = 0.0;
    for i in 1..s.len() - 1 {
        let (t0, t1, t2) = (s[i - 1].t(), s[i].t(), s[i + 1].t());
        let (i0, i1, i2) = (s[i - 1].conserved.inertia, s[i].conserved.inertia, s[i + 1].conserved.inertia);
        let hm = t1 - t0;
        let hp = t2 - t1;
        if !(hm > 0.0 && hp > 0.0) {
            return Err(Error::Usage("sample times must be strictly increasing".into()));
        }
        let second = 2.0 * ((i2 - i1) / hp - (i1 - i0) / hm) / (hp + hm);
        let c = &s[i].conserved;
        let (Some(h), Some(v)) = (c.energy, c.potential) else {
            return Err(Error::SingularConfiguration { ratio: s[i].shape.collinearity_ratio() });
        };
        let scale = (4.0 * h.abs()).max(4.0 * c.kinetic.max(v.abs()));
        worst = worst.max((second - 4.0 * h).abs() / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointReport {
    /// Direction of the principal axis at the earliest sample, in `[0, π)`.
    pub start_line_angle: f64,
    pub end_line_angle: f64,
    /// `(end - start) mod π`, in `[0, π)`.
    pub angle_between: f64,
    /// `|w₃| / |w|` at the first and last samples.
    pub start_ratio: f64,
    pub end_ratio: f64,
}

/// Direction in `[0, π)` of the line through the center of mass minimizing
/// the mass-weighted squared distance of the bodies.
pub fn principal_axis_angle(ms: &MassSystem, q: &PlanarConfig) -> f64 {
    let cm = q.center_of_mass(ms);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (m, p) in ms.masses().iter().zip(q.points()) {
        let d = p - cm;
        sxx += m * d.x * d.x;
        syy += m * d.y * d.y;
        sxy += m * d.x * d.y;
    }
    (0.5 * (2.0 * sxy).atan2(sxx - syy)).rem_euclid(PI)
}

/// Signed difference of two undirected line angles, wrapped to `[-π/2, π/2)`.
pub fn line_angle_difference(a: f64, b: f64) -> f64 {
    (a - b + PI / 2.0).rem_euclid(PI) - PI / 2.0
}

pub fn endpoint_analysis(ms: &MassSystem, traj: &Trajectory) -> Result<EndpointReport> {
    for (side, term) in [("start", traj.start), ("end", traj.end)] {
        if term != Termination::ReachedStopRatio {
            return Err(Error::EndpointUnavailable { side, reason: term.to_string() });
        }
    }
    let (first, last) = match (traj.samples.first(), traj.samples.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Usage("empty trajectory".into())),
    };
    let a = principal_axis_angle(ms, &first.state.q);
    let b = principal_axis_angle(ms, &last.state.q);
    Ok(EndpointReport {
        start_line_angle: a,
        end_line_angle: b,
        angle_between: (b - a).rem_euclid(PI),
        start_ratio: first.shape.collinearity_ratio(),
        end_ratio: last.shape.collinearity_ratio(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbody::{mass_inner, moment_of_inertia};
    use approx::assert_relative_eq;

    fn unit3() -> MassSystem {
        MassSystem::equal(3, 1.0).unwrap()
    }

    #[test]
    fn equilateral_initial_condition() {
        let ms = unit3();
        let s = sample_initial_conditions(&ms, &ICSpec::equilateral(0.3)).unwrap();
        assert_relative_eq!(mass_inner(&ms, &s.v, &s.v).unwrap(), 32.0 / 3.0, max_relative = 1e-13);
        let sample = Sample::new(&ms, s.clone()).unwrap();
        assert!(sample.scaled_residuals(&ms).max() <= 1e-12, "{:?}", sample.scaled_residuals(&ms));
        assert_relative_eq!(moment_of_inertia(&ms, &s.q), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn opposite_theta_reverses_velocity() {
        let ms = MassSystem::new(vec![1.0, 2.0, 0.7], 0.5).unwrap();
        let spec = ICSpec { i0: 2.0, shape: ShapePoint::new(0.2, -0.3, 0.4), theta: 1.1 };
        let a = sample_initial_conditions(&ms, &spec).unwrap();
        let b = sample_initial_conditions(&ms, &ICSpec { theta: 1.1 + PI, ..spec }).unwrap();
        for (x, y) in a.v.iter().zip(&b.v) {
            assert_relative_eq!(*x, -*y, epsilon = 1e-13);
        }
        assert_eq!(a.q, b.q);
        let r = Sample::new(&ms, a).unwrap().scaled_residuals(&ms);
        assert!(r.max() <= 1e-12, "{r:?}");
    }

    #[test]
    fn equator_start_is_rejected() {
        let spec = ICSpec { i0: 1.0, shape: ShapePoint::new(0.5, 0.0, 0.0), theta: 0.0 };
        assert!(matches!(sample_initial_conditions(&unit3(), &spec), Err(Error::DegenerateStart(_))));
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig { stop_ratio: 1.5, ..Default::default() };
        assert!(bad.validate().unwrap_err().is_usage());
        let bad = IntegratorConfig { rel_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(IntegratorConfig::default().validate().is_ok());
    }

    #[test]
    fn principal_axis_of_collinear_line() {
        let ms = MassSystem::new(vec![1.0, 3.0, 2.0], 1.0).unwrap();
        for &theta0 in &[0.0, 0.4, 1.2, 2.9, -0.7] {
            let q = PlanarConfig::from_xy(&[(-1.0, 0.0), (0.5, 0.0), (2.0, 0.0)]).rotated(theta0);
            let a = principal_axis_angle(&ms, &q);
            assert!(line_angle_difference(a, theta0).abs() < 1e-14, "{a} vs {theta0}");
        }
    }

    #[test]
    fn lagrange_jacobi_needs_samples() {
        let ms = unit3();
        let s = sample_initial_conditions(&ms, &ICSpec::equilateral(0.0)).unwrap();
        let traj = Trajectory {
            samples: vec![Sample::new(&ms, s).unwrap()],
            start: Termination::NotIntegrated,
            end: Termination::NotIntegrated,
        };
        assert!(lagrange_jacobi_check(&traj).unwrap_err().is_usage());
    }

    #[test]
    fn endpoint_requires_stop_ratio_on_both_sides() {
        let ms = unit3();
        let s = sample_initial_conditions(&ms, &ICSpec::equilateral(0.3)).unwrap();
        let cfg = IntegratorConfig { direction: Direction::Forward, ..Default::default() };
        let traj = integrate(&ms, &s, &cfg).unwrap();
        assert_eq!(traj.end, Termination::ReachedStopRatio);
        assert!(matches!(endpoint_analysis(&ms, &traj), Err(Error::EndpointUnavailable { side: "start", .. })));
    }

    #[test]
    fn max_time_termination() {
        let ms = unit3();
        let s = sample_initial_conditions(&ms, &ICSpec::equilateral(0.3)).unwrap();
        let cfg = IntegratorConfig { max_time: 1e-3, ..Default::default() };
        let traj = integrate(&ms, &s, &cfg).unwrap();
        assert_eq!(traj.start, Termination::MaxTime);
        assert_eq!(traj.end, Termination::MaxTime);
    }
}
