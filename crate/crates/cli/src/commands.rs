//! Subcommand implementations.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use trishape::dynamics::{
    endpoint_analysis, integrate, sample_initial_conditions, ICSpec, IntegratorConfig, Sample, Trajectory,
};
use trishape::geometry::curvature::{curvature_survey, summarize};
use trishape::geometry::{
    fit_vertical_plane, gauss_curvature_shape_sphere, hausdorff_distance, resample_by_arc_length, sectional_curvature,
    ChartPoint, GeodesicArc,
};
use trishape::shape::{klein_to_jemisphere, lift_to_configuration};
use trishape::topology::{component_census, DEFAULT_EPS};
use trishape::{KleinPoint, MassSystem, ShapePoint};

use crate::config::{Format, PotentialArg, RunConfig};
use crate::output::{self, row};
use crate::{Cli, CliError, Command};

/// Tolerances on the plane residual and sphere deviation, relative to `I0`.
const PLANE_TOL: f64 = 1e-5;
const SPHERE_TOL: f64 = 1e-6;
/// Points of the arc-length resampling used for the Hausdorff comparison.
const RESAMPLE: usize = 4000;
/// Extra samples per step for `verify-geodesic` unless configured.
const VERIFY_DENSE: usize = 16;

pub fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let flags = match &cli.command {
        Command::Simulate { run }
        | Command::VerifyGeodesic { run }
        | Command::Geodesic { run, .. }
        | Command::Curvature { run }
        | Command::Components { run }
        | Command::Ic { run }
        | Command::Klein { run } => run,
    };
    let c = base.overridden_by(flags);
    let text = match &cli.command {
        Command::Simulate { .. } => simulate(&c)?,
        Command::VerifyGeodesic { .. } => verify_geodesic(&c)?,
        Command::Geodesic { from, to, .. } => geodesic(&c, from, to)?,
        Command::Curvature { .. } => curvature(&c)?,
        Command::Components { .. } => components(&c)?,
        Command::Ic { .. } => ic(&c)?,
        Command::Klein { .. } => klein(&c)?,
    };
    match &c.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// The resolved configuration with unset keys left out.
fn config_echo(c: &RunConfig) -> Value {
    let mut v = serde_json::to_value(c).expect("plain struct");
    if let Value::Object(map) = &mut v {
        map.retain(|_, x| !x.is_null());
    }
    v
}

fn constants(ms: &MassSystem) -> Result<Value, CliError> {
    let mu = ms.mu()?;
    let scale = ms.reduced_metric_scale()?;
    Ok(json!({
        "mu": mu,
        "mu_squared": mu * mu,
        "reduced_metric_scale": scale,
        "gauss_curvature": -1.0 / scale,
        "candidate_minus_inv_gamma_mu2": -1.0 / (ms.gamma() * mu * mu),
        "candidate_minus_inv_mu_sqrt_gamma": -1.0 / (mu * ms.gamma().sqrt()),
    }))
}

struct Run {
    ms: MassSystem,
    spec: ICSpec,
    cfg: IntegratorConfig,
    traj: Trajectory,
}

fn run_simulation(c: &RunConfig) -> Result<Run, CliError> {
    let ms = c.mass_system(3)?;
    let spec = c.ic_spec()?;
    let cfg = c.integrator()?;
    let s0 = sample_initial_conditions(&ms, &spec)?;
    let traj = integrate(&ms, &s0, &cfg)?;
    log::info!("integrated {} samples ({} / {})", traj.len(), traj.start, traj.end);
    Ok(Run { ms, spec, cfg, traj })
}

fn run_summary(c: &RunConfig, r: &Run) -> Result<Value, CliError> {
    let res = r.traj.max_scaled_residuals(&r.ms);
    let times = r.traj.times();
    Ok(json!({
        "scenario": c.scenario.clone().unwrap_or_else(|| "default".into()),
        "config": config_echo(c),
        "masses": r.ms.masses(),
        "gamma": r.ms.gamma(),
        "initial_condition": r.spec,
        "integrator": r.cfg,
        "constants": constants(&r.ms)?,
        "samples": r.traj.len(),
        "time_span": [times.first(), times.last()],
        "termination": { "start": r.traj.start.to_string(), "end": r.traj.end.to_string() },
        "max_scaled_residuals": res,
        "max_inertia_deviation": r.traj.max_inertia_deviation(r.spec.i0),
    }))
}

fn simulate(c: &RunConfig) -> Result<String, CliError> {
    let r = run_simulation(c)?;
    Ok(match c.format(Format::Csv) {
        Format::Csv => output::trajectory_to_csv(&r.traj),
        Format::Json => to_json(&run_summary(c, &r)?),
    })
}

fn verify_geodesic(c: &RunConfig) -> Result<String, CliError> {
    let mut c = c.clone();
    c.dense_output.get_or_insert(VERIFY_DENSE);
    let r = run_simulation(&c)?;
    let shapes = r.traj.shapes();
    let fit = fit_vertical_plane(&shapes)?;
    if c.format(Format::Json) == Format::Csv {
        let mut out = String::from("t,w1,w2,w3,residual\n");
        for s in &r.traj.samples {
            let w = s.shape;
            let _ = writeln!(out, "{}", row(&[s.t(), w.w1, w.w2, w.w3, fit.residual(&w)]));
        }
        return Ok(out);
    }
    let i0 = r.spec.i0;
    let sphere = shapes.iter().map(|w| (w.norm() - i0 / 2.0).abs()).fold(0.0, f64::max);
    let first = shapes[0];
    let last = shapes[shapes.len() - 1];
    let geo = GeodesicArc::through(&first, &last)?;
    let hausdorff = hausdorff_distance(&resample_by_arc_length(&shapes, RESAMPLE), &geo.sample(RESAMPLE));
    let endpoints = match endpoint_analysis(&r.ms, &r.traj) {
        Ok(e) => serde_json::to_value(e).expect("plain struct"),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let mut report = run_summary(&c, &r)?;
    let plane_ok = fit.max_residual <= PLANE_TOL * i0;
    let sphere_ok = sphere <= SPHERE_TOL * i0;
    report["plane_fit"] = serde_json::to_value(fit).expect("plain struct");
    report["max_sphere_deviation"] = json!(sphere);
    report["geodesic"] =
        json!({ "plane": [geo.a, geo.b, geo.c], "length": geo.length(), "hausdorff_distance": hausdorff });
    report["endpoints"] = endpoints;
    report["pass"] = json!({
        "plane_tolerance": PLANE_TOL * i0,
        "sphere_tolerance": SPHERE_TOL * i0,
        "plane": plane_ok,
        "sphere": sphere_ok,
    });
    Ok(to_json(&report))
}

fn shape_arg(v: &[f64], name: &str) -> Result<ShapePoint, CliError> {
    match v {
        [a, b, c] => Ok(ShapePoint::new(*a, *b, *c)),
        _ => Err(CliError::Usage(format!("--{name} needs 3 components, got {}", v.len()))),
    }
}

fn geodesic(c: &RunConfig, from: &[f64], to: &[f64]) -> Result<String, CliError> {
    let (wa, wb) = (shape_arg(from, "from")?, shape_arg(to, "to")?);
    let n = c.samples.unwrap_or(101);
    if n < 2 {
        return Err(CliError::Usage("geodesic needs at least 2 samples".into()));
    }
    let arc = GeodesicArc::through(&wa, &wb)?;
    let pts = arc.sample(n);
    let s: Vec<f64> = pts.iter().map(|w| trishape::geometry::jemisphere::hyperbolic_distance(&wa, w)).collect();
    Ok(match c.format(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("s,w1,w2,w3\n");
            for (s, w) in s.iter().zip(&pts) {
                let _ = writeln!(out, "{}", row(&[*s, w.w1, w.w2, w.w3]));
            }
            out
        }
        Format::Json => to_json(&json!({
            "plane": [arc.a, arc.b, arc.c],
            "length": arc.length(),
            "s": s,
            "points": pts,
        })),
    })
}

fn curvature(c: &RunConfig) -> Result<String, CliError> {
    let ms = c.mass_system(4)?;
    let h = c.h.unwrap_or(trishape::geometry::curvature::DEFAULT_RELATIVE_STEP);
    if ms.len() == 3 {
        curvature_three(c, &ms, h)
    } else {
        curvature_survey_report(c, &ms, h)
    }
}

fn curvature_three(c: &RunConfig, ms: &MassSystem, h: f64) -> Result<String, CliError> {
    let n = c.samples.unwrap_or(16);
    let scale = ms.reduced_metric_scale()?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        let z = 0.1 + 0.9 * rng.random::<f64>();
        let r = (1.0 - z * z).sqrt();
        let w = ShapePoint::new(0.5 * r * phi.cos(), 0.5 * r * phi.sin(), 0.5 * z);
        let gauss = gauss_curvature_shape_sphere(&w, scale)?;
        let p = ChartPoint::from_configuration(ms, &lift_to_configuration(ms, &w)?)?;
        let k = sectional_curvature(ms, &p, &[1.0, 0.0], &[0.0, 1.0], h)?;
        rows.push((w, gauss, k.sectional_curvature));
    }
    Ok(match c.format(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("index,w1,w2,w3,gauss,chart_sectional\n");
            for (i, (w, g, k)) in rows.iter().enumerate() {
                let _ = writeln!(out, "{i},{}", row(&[w.w1, w.w2, w.w3, *g, *k]));
            }
            out
        }
        Format::Json => {
            let g: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let spread = |v: &[f64]| {
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
            };
            let k: Vec<f64> = rows.iter().map(|r| r.2).collect();
            to_json(&json!({
                "n_bodies": 3,
                "samples": n,
                "seed": c.seed(),
                "constants": constants(ms)?,
                "gauss_mean": g.iter().sum::<f64>() / n as f64,
                "gauss_spread": spread(&g),
                "chart_sectional_mean": k.iter().sum::<f64>() / n as f64,
                "chart_sectional_spread": spread(&k),
            }))
        }
    })
}

fn curvature_survey_report(c: &RunConfig, ms: &MassSystem, h: f64) -> Result<String, CliError> {
    let n = c.samples.unwrap_or(1000);
    let pot = c.potential.unwrap_or(PotentialArg::Triples);
    let samples = curvature_survey(ms, pot.into(), n, c.seed(), h)?;
    Ok(match c.format(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("index,K,error,step,sign\n");
            for (i, s) in samples.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{i},{},{}",
                    row(&[s.sectional_curvature, s.error_estimate, s.step]),
                    s.resolved_sign()
                );
            }
            out
        }
        Format::Json => to_json(&json!({
            "n_bodies": ms.len(),
            "masses": ms.masses(),
            "potential": pot,
            "seed": c.seed(),
            "relative_step": h,
            "summary": summarize(&samples),
        })),
    })
}

fn components(c: &RunConfig) -> Result<String, CliError> {
    let ms = c.mass_system(4)?;
    let n = c.samples.unwrap_or(100_000);
    let eps = c.eps.unwrap_or(DEFAULT_EPS);
    let census = component_census(&ms, n, eps, c.seed())?;
    Ok(match c.format(Format::Csv) {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# n = {}", census.n_bodies);
            let _ = writeln!(out, "# samples = {}", census.samples_drawn);
            let _ = writeln!(out, "# rejected = {}", census.samples_rejected);
            let _ = writeln!(out, "# eps = {eps:e}");
            let _ = writeln!(out, "# seed = {}", census.seed);
            let _ = writeln!(out, "# distinct = {}", census.distinct);
            let _ = writeln!(out, "# stable = {}", census.is_stable());
            for line in census.to_lines() {
                let _ = writeln!(out, "{line}");
            }
            out
        }
        Format::Json => {
            let realized: serde_json::Map<String, Value> =
                census.realized.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            to_json(&json!({
                "n_bodies": census.n_bodies,
                "samples": census.samples_drawn,
                "rejected": census.samples_rejected,
                "eps": eps,
                "seed": census.seed,
                "distinct": census.distinct,
                "stable": census.is_stable(),
                "last_new_at": census.last_new_at(),
                "realized": realized,
                "caveat": "distinct sign vectors bound the number of chambers from below",
            }))
        }
    })
}

fn ic(c: &RunConfig) -> Result<String, CliError> {
    let ms = c.mass_system(3)?;
    let spec = c.ic_spec()?;
    let s = Sample::new(&ms, sample_initial_conditions(&ms, &spec)?)?;
    Ok(match c.format(Format::Csv) {
        Format::Csv => output::trajectory_csv(std::slice::from_ref(&s)),
        Format::Json => to_json(&json!({
            "masses": ms.masses(),
            "gamma": ms.gamma(),
            "initial_condition": spec,
            "positions": s.state.q.points().iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            "velocities": s.state.v.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            "shape": s.shape,
            "conserved": s.conserved,
        })),
    })
}

fn klein(c: &RunConfig) -> Result<String, CliError> {
    let n = c.samples.unwrap_or(8);
    const POINTS: usize = 101;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
    let disc_point = |rng: &mut ChaCha8Rng| {
        let r = 0.95 * rng.random::<f64>().sqrt();
        let a = rng.random::<f64>() * std::f64::consts::TAU;
        KleinPoint::new(r * a.cos(), r * a.sin())
    };
    let mut curves = Vec::with_capacity(n);
    for _ in 0..n {
        let (u, v) = (disc_point(&mut rng), disc_point(&mut rng));
        let mut pts = Vec::with_capacity(POINTS);
        for j in 0..POINTS {
            let s = j as f64 / (POINTS - 1) as f64;
            let k = KleinPoint::new(u.u1 + s * (v.u1 - u.u1), u.u2 + s * (v.u2 - u.u2));
            pts.push((k, klein_to_jemisphere(&k)?));
        }
        curves.push(pts);
    }
    Ok(match c.format(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("curve,index,u1,u2,w1,w2,w3\n");
            for (i, pts) in curves.iter().enumerate() {
                for (j, (k, w)) in pts.iter().enumerate() {
                    let _ = writeln!(out, "{i},{j},{}", row(&[k.u1, k.u2, w.w1, w.w2, w.w3]));
                }
            }
            out
        }
        Format::Json => to_json(&json!({
            "seed": c.seed(),
            "curves": curves.iter().map(|pts| json!({
                "klein": pts.iter().map(|p| p.0).collect::<Vec<_>>(),
                "jemisphere": pts.iter().map(|p| p.1).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(f: impl FnOnce(&mut RunConfig)) -> RunConfig {
        let mut c = RunConfig::default();
        f(&mut c);
        c
    }

    #[test]
    fn geodesic_csv_starts_at_zero_distance() {
        let out = geodesic(&cfg(|c| c.samples = Some(5)), &[0.3, 0.0, 0.4], &[0.0, 0.3, 0.4]).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "s,w1,w2,w3");
        assert_eq!(lines.len(), 6);
        let s0: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert!(s0.abs() < 1e-12);
    }

    #[test]
    fn geodesic_across_hemispheres_is_a_domain_error() {
        let e = geodesic(&RunConfig::default(), &[0.3, 0.0, 0.4], &[0.0, 0.3, -0.4]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn klein_points_lie_above_their_chords() {
        let out = klein(&cfg(|c| c.samples = Some(2))).unwrap();
        for line in out.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(v[2], v[4]);
            assert_eq!(v[3], v[5]);
            assert!((v[4] * v[4] + v[5] * v[5] + v[6] * v[6] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn three_body_curvature_matches_constant() {
        let c = cfg(|c| {
            c.n_bodies = Some(3);
            c.samples = Some(3);
        });
        let out = curvature(&c).unwrap();
        let k = -1.0 / c.mass_system(3).unwrap().reduced_metric_scale().unwrap();
        for line in out.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((v[4] - k).abs() < 1e-6, "{line}");
            assert!((v[5] - k).abs() < 1e-4, "{line}");
        }
    }

    #[test]
    fn ic_row_has_every_column() {
        let out = ic(&RunConfig::default()).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), output::TRAJECTORY_COLUMNS.len());
    }

    #[test]
    fn components_three_bodies() {
        let out = components(&cfg(|c| {
            c.n_bodies = Some(3);
            c.samples = Some(1000);
        }))
        .unwrap();
        assert!(out.contains("# distinct = 2\n"));
    }
}
