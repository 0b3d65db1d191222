//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use trishape::dynamics::{
    endpoint_analysis, integrate, line_angle_difference, sample_initial_conditions, ICSpec, IntegratorConfig,
    Termination, Trajectory,
};
use trishape::geometry::chart::{jm_conformal_factor, ChartPoint};
use trishape::geometry::curvature::{curvature_survey, summarize, DEFAULT_RELATIVE_STEP};
use trishape::geometry::{
    fit_vertical_plane, gauss_curvature_shape_sphere, hausdorff_distance, jemisphere_geodesic, resample_by_arc_length,
    vn_potential, ChartPotential,
};
use trishape::nbody::{cross, moment_of_inertia, potential, potential_gradient};
use trishape::topology::component_census;
use trishape::{MassSystem, PlanarConfig, ShapePoint, Vec2};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn default_run(stop_ratio: f64, dense: usize) -> (MassSystem, Trajectory) {
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let s0 = sample_initial_conditions(&ms, &ICSpec::equilateral(0.3)).unwrap();
    let cfg = IntegratorConfig { stop_ratio, dense_output: dense, ..Default::default() };
    let traj = integrate(&ms, &s0, &cfg).unwrap();
    (ms, traj)
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = trishape_cli::run(std::iter::once("trishape").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn criterion_1() -> Outcome {
    let (_, traj) = default_run(1e-2, 16);
    let shapes = traj.shapes();
    let sphere = shapes.iter().map(|w| (w.norm() - 0.5).abs()).fold(0.0, f64::max);
    let fit = fit_vertical_plane(&shapes).unwrap();
    let both_sides = traj.start == Termination::ReachedStopRatio && traj.end == Termination::ReachedStopRatio;
    outcome(
        both_sides && sphere <= 1e-6 && fit.max_residual <= 1e-5,
        format!("max ||w|-1/2| = {sphere:.2e} (<= 1e-6), plane max residual = {:.2e} (<= 1e-5)", fit.max_residual),
    )
}

fn criterion_2() -> Outcome {
    let (ms, traj) = default_run(1e-2, 16);
    let r = traj.max_scaled_residuals(&ms);
    let di = traj.max_inertia_deviation(1.0);
    outcome(
        r.max() <= 1e-8 && di <= 1e-6,
        format!(
            "H {:.1e}, P {:.1e}, J {:.1e}, Idot {:.1e} (<= 1e-8); |I-1| = {di:.1e} (<= 1e-6)",
            r.energy, r.momentum, r.angular_momentum, r.inertia_rate
        ),
    )
}

fn criterion_3() -> Outcome {
    let (_, traj) = default_run(1e-2, 16);
    let shapes = traj.shapes();
    let resampled = resample_by_arc_length(&shapes, 4000);
    let geo = jemisphere_geodesic(&shapes[0], shapes.last().unwrap(), 4000).unwrap();
    let d = hausdorff_distance(&resampled, &geo);
    outcome(d <= 1e-4, format!("Hausdorff distance = {d:.2e} (<= 1e-4)"))
}

fn criterion_4() -> Outcome {
    let (ms, coarse) = default_run(1e-2, 0);
    let (_, fine) = default_run(1e-3, 0);
    let ends = [coarse.start, coarse.end, fine.start, fine.end];
    if ends.iter().any(|t| *t != Termination::ReachedStopRatio) {
        return outcome(false, format!("terminations {ends:?}"));
    }
    let a = endpoint_analysis(&ms, &coarse).unwrap();
    let b = endpoint_analysis(&ms, &fine).unwrap();
    let change = line_angle_difference(a.angle_between, b.angle_between).abs();
    outcome(
        change <= 5e-3,
        format!(
            "both ends collinear; endpoint line angle {:.6} -> {:.6}, change {change:.1e} rad (<= 5e-3)",
            a.angle_between, b.angle_between
        ),
    )
}

fn criterion_5() -> Outcome {
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let physical = ms.reduced_metric_scale().unwrap();
    let mu = ms.mu().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<ShapePoint> = (0..12)
        .map(|_| {
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let z = 0.05 + 0.95 * rng.random::<f64>();
            let r = (1.0 - z * z).sqrt();
            ShapePoint::new(0.5 * r * phi.cos(), 0.5 * r * phi.sin(), 0.5 * z)
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for scale in [1.0, physical] {
        let k: Vec<f64> = points.iter().map(|w| gauss_curvature_shape_sphere(w, scale).unwrap()).collect();
        let err = k.iter().map(|k| (k + 1.0 / scale).abs()).fold(0.0, f64::max);
        let spread =
            k.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - k.iter().cloned().fold(f64::INFINITY, f64::min);
        pass &= err <= 1e-6 && spread <= 1e-6;
        parts.push(format!("scale {scale:.4}: max |K + 1/scale| = {err:.1e}, spread {spread:.1e}"));
    }
    println!(
        "  note: K = {:.6} for 8 gamma mu^2; -1/(gamma mu^2) = {:.6}; -1/(mu sqrt(gamma)) = {:.6}",
        -1.0 / physical,
        -1.0 / (ms.gamma() * mu * mu),
        -1.0 / (mu * ms.gamma().sqrt())
    );
    outcome(pass, format!("12 points, {}", parts.join("; ")))
}

fn criterion_6() -> Outcome {
    let ms = MassSystem::equal(4, 1.0).unwrap();
    let strong =
        summarize(&curvature_survey(&ms, ChartPotential::StrongForce, 1000, 1, DEFAULT_RELATIVE_STEP).unwrap());
    let triples = summarize(&curvature_survey(&ms, ChartPotential::Triples, 1000, 1, DEFAULT_RELATIVE_STEP).unwrap());
    println!(
        "  note: V_N metric, same sampler: {} positive, {} negative, {} unresolved, K in [{:.3e}, {:.3e}]",
        triples.positive, triples.negative, triples.unresolved, triples.min, triples.max
    );
    outcome(
        strong.positive > 0 && strong.negative > 0,
        format!(
            "strong-force N=4 JM metric, {} samples: {} positive, {} negative, {} unresolved",
            strong.samples, strong.positive, strong.negative, strong.unresolved
        ),
    )
}

fn criterion_7() -> Outcome {
    let three = component_census(&MassSystem::equal(3, 1.0).unwrap(), 100_000, 1e-6, 1).unwrap();
    let four = component_census(&MassSystem::equal(4, 1.0).unwrap(), 100_000, 1e-6, 1).unwrap();
    let half = four.distinct_after(50_000);
    outcome(
        three.distinct == 2 && four.distinct == 14 && half == 14 && four.is_stable(),
        format!(
            "N=3: {} sign vectors; N=4: {} sign vectors ({} after half the samples, last new at sample {:?})",
            three.distinct,
            four.distinct,
            half,
            four.last_new_at()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut grad_err, mut identity_err) = (0.0_f64, 0.0_f64);
    let mut done = 0;
    while done < 100 {
        let ms = MassSystem::new((0..3).map(|_| 0.2 + 4.8 * rng.random::<f64>()).collect(), 0.5 + rng.random::<f64>())
            .unwrap();
        let q =
            PlanarConfig((0..3).map(|_| Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect());
        let inertia = moment_of_inertia(&ms, &q);
        let area = trishape::nbody::signed_area(&q).unwrap();
        if area.abs() < 0.05 * inertia {
            continue;
        }
        done += 1;
        let g = potential_gradient(&ms, &q).unwrap();
        let v = potential(&ms, &q).unwrap();
        let step = 1e-4 * inertia.sqrt();
        let scale = g.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for (a, ga) in g.iter().enumerate() {
            for axis in 0..2 {
                let eval = |k: f64| {
                    let mut p = q.clone();
                    p.0[a][axis] += k * step;
                    potential(&ms, &p).unwrap()
                };
                let fd = (eval(-2.0) - 8.0 * eval(-1.0) + 8.0 * eval(1.0) - eval(2.0)) / (12.0 * step);
                grad_err = grad_err.max((fd - ga[axis]).abs() / scale);
            }
        }
        // homogeneity of degree -2, translation and rotation invariance
        let euler: f64 = q.points().iter().zip(&g).map(|(p, d)| p.dot(d)).sum::<f64>() + 2.0 * v;
        let trans: Vec2 = g.iter().sum();
        let rot: f64 = q.points().iter().zip(&g).map(|(p, d)| cross(p, d)).sum();
        let r = scale * q.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
        identity_err = identity_err.max(euler.abs() / v.abs()).max(trans.norm() / scale).max(rot.abs() / r);
    }
    let ms4 = MassSystem::equal(4, 1.0).unwrap();
    let square = PlanarConfig::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
    let v4 = vn_potential(&ms4, &square).unwrap();
    let hand = -64.0 / 3.0;
    let v4_err = ((v4 - hand) / hand).abs();
    outcome(
        grad_err <= 1e-6 && identity_err <= 1e-10 && v4_err <= 1e-12,
        format!(
            "gradient vs FD {grad_err:.1e} (<= 1e-6), identities {identity_err:.1e} (<= 1e-10), V4(square) = {v4} rel err {v4_err:.1e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let ms = MassSystem::equal(4, 1.0).unwrap();
    let at = |delta: f64| {
        let q = PlanarConfig::from_xy(&[(-1.0, 0.0), (1.0, 0.0), (0.0, delta), (0.3, 1.5)]);
        jm_conformal_factor(&ms, &ChartPoint::from_configuration(&ms, &q).unwrap()).unwrap()
    };
    let deltas: Vec<f64> = (0..7).map(|i| 1e-2 * 10f64.powf(-0.5 * i as f64)).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = deltas.iter().map(|d| at(*d).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    outcome((slope + 2.0).abs() <= 0.1, format!("log-log slope = {slope:.4} (-2 +- 0.1)"))
}

fn criterion_10() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["simulate"],
        &["verify-geodesic"],
        &["components", "--seed", "7"],
        &["curvature", "--samples", "50", "--seed", "3", "--format", "csv"],
        &["curvature", "--n", "3", "--seed", "3", "--format", "json"],
        &["klein", "--seed", "9"],
    ];
    let mut failed = Vec::new();
    for args in runs {
        let (ca, a, _) = cli(args);
        let (cb, b, _) = cli(args);
        if ca != 0 || cb != 0 || a != b || a.is_empty() {
            failed.push(args.join(" "));
        }
    }
    outcome(failed.is_empty(), format!("{} commands run twice, differing: {failed:?}", runs.len()))
}

/// The documented command-line examples, through the real binary.
fn cli_examples() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_trishape");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let verify = run(&["verify-geodesic"]);
    let report: Value = serde_json::from_slice(&verify.stdout).unwrap_or(Value::Null);
    let residual = report["plane_fit"]["max_residual"].as_f64().unwrap_or(f64::NAN);
    let census = run(&["components", "--n", "4", "--samples", "100000", "--seed", "1"]);
    let has_14 = String::from_utf8_lossy(&census.stdout).lines().any(|l| l.ends_with("distinct = 14"));
    let collinear = run(&["simulate", "--shape", "1,0,0"]);
    let bad_flag = run(&["simulate", "--no-such-flag"]);
    let codes = (verify.status.code(), census.status.code(), collinear.status.code(), bad_flag.status.code());
    outcome(
        codes == (Some(0), Some(0), Some(1), Some(2)) && residual <= 1e-5 && has_14,
        format!("exit codes {codes:?} (0, 0, 1, 2), verify plane residual {residual:.1e}, distinct = 14: {has_14}"),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("1 vertical-plane geodesic on the shape sphere", criterion_1),
        ("2 conservation", criterion_2),
        ("3 geodesic equivalence", criterion_3),
        ("4 collinear ends", criterion_4),
        ("5 hyperbolic reduced metric", criterion_5),
        ("6 mixed N=4 sectional curvature", criterion_6),
        ("7 component census", criterion_7),
        ("8 gradient and hand values", criterion_8),
        ("9 near-collinear asymptotics", criterion_9),
        ("10 determinism", criterion_10),
        ("cli examples", cli_examples),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let t = std::time::Instant::now();
        let o = check();
        println!(
            "criterion {name}: {} | {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        failures += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
