//! CSV layouts and their documentation.

use std::fmt::Write as _;

use trishape::dynamics::{Sample, Trajectory};

pub const TRAJECTORY_COLUMNS: [&str; 22] = [
    "t", "q1x", "q1y", "q2x", "q2y", "q3x", "q3y", "v1x", "v1y", "v2x", "v2y", "v3x", "v3y", "H", "Px", "Py", "J",
    "Idot", "I", "w1", "w2", "w3",
];

pub const TRAJECTORY_HELP: &str = "\
CSV columns (--format csv, the default), one row per sample in time order:
  t            time
  q1x..q3y     positions of bodies 1-3
  v1x..v3y     velocities of bodies 1-3
  H            energy K + V
  Px, Py       linear momentum
  J            angular momentum
  Idot         dI/dt = 2<q, v>
  I            moment of inertia about the center of mass
  w1, w2, w3   shape coordinates (|w| = I/2, w3 = 2 mu area)
Values are written with 17 significant digits.
--format json writes a run summary instead: config echo, derived constants,
terminations, maximal scaled residuals of H, P, J, Idot and |I - I0|.";

pub const VERIFY_HELP: &str = "\
Writes a JSON report (--format json, the default): config echo, derived
constants, terminations, residual statistics, the best vertical plane
A w1 + B w2 = C with max/rms residuals, max ||w| - I0/2|, the Hausdorff
distance to the closed-form hemisphere geodesic between the end shapes,
the endpoint line angles and a pass flag for the plane and sphere tolerances.
--format csv writes the shape curve instead, columns:
  t            time
  w1, w2, w3   shape coordinates
  residual     A w1 + B w2 - C for the fitted plane";

pub const GEODESIC_HELP: &str = "\
CSV columns (--format csv, the default):
  s            hyperbolic distance from the start in |dw|^2 / w3^2
  w1, w2, w3   point on the geodesic
--format json writes the plane A, B, C, the length and the points.
--samples sets the number of points (default 101).";

pub const CURVATURE_HELP: &str = "\
--n 3: Gauss curvature of 8 gamma mu^2 |dw|^2 / w3^2 at --samples
random shapes (default 16), from the conformal formula and from the chart
metric, with the candidate constants -1/(8 gamma mu^2), -1/(gamma mu^2) and
-1/(mu sqrt(gamma)). CSV columns:
  index, w1, w2, w3, gauss, chart_sectional
--n 4 (default) and above: sectional curvatures of the JM metric
2 U~ g_FS at --samples random (point, 2-plane) pairs (default 1000),
--potential triples|strong-force.
CSV columns:
  index        sample number
  K            sectional curvature at step h
  error        |K(h) - K(h/2)|
  step         absolute finite-difference step
  sign         +1 / -1 when |K| > error, else 0
--format json writes summary statistics in both cases.";

pub const COMPONENTS_HELP: &str = "\
--format csv (default): '#' header lines with the run parameters,
'distinct = <count>' and 'stable = <bool>', then one line per realized sign
vector: the signs of the triangle areas over triples (i<j<k) in lexicographic
order as a +/- string, a space, and the number of samples realizing it.
--format json writes the same data as an object. Defaults: n = 4,
samples = 100000, eps = 1e-6, seed = 1. Distinct sign vectors bound the
number of chambers from below; they equal it when every chamber is connected.";

pub const IC_HELP: &str = "\
CSV (default): the trajectory header and one row, columns as in
'simulate --help'. --format json writes positions, velocities, shape and
conserved quantities.";

pub const KLEIN_HELP: &str = "\
--samples chords (default 8) with random endpoints in the unit disc, each
lifted to the unit upper hemisphere and sampled at 101 points. CSV columns:
  curve        chord number
  index        point number along the curve
  u1, u2       Klein-disc point (a straight chord)
  w1, w2, w3   hemisphere point above it (a vertical-plane geodesic)";

/// Round-trip-exact decimal form of a double.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn row(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

pub fn sample_row(s: &Sample) -> Vec<f64> {
    let mut v = vec![s.t()];
    for p in s.state.q.points() {
        v.extend([p.x, p.y]);
    }
    for p in &s.state.v {
        v.extend([p.x, p.y]);
    }
    let c = &s.conserved;
    v.extend([
        c.energy.unwrap_or(f64::NAN),
        c.momentum.x,
        c.momentum.y,
        c.angular_momentum,
        c.inertia_rate,
        c.inertia,
        s.shape.w1,
        s.shape.w2,
        s.shape.w3,
    ]);
    v
}

pub fn trajectory_csv(samples: &[Sample]) -> String {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for s in samples {
        let _ = writeln!(out, "{}", row(&sample_row(s)));
    }
    out
}

pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    trajectory_csv(&traj.samples)
}
