use trishape::dynamics::*;
use trishape::geometry::jemisphere::{
    fit_vertical_plane, hausdorff_distance, hyperbolic_length, jemisphere_geodesic, resample_by_arc_length,
};
use trishape::geometry::jm_length;
use trishape::nbody::{moment_of_inertia, potential_gradient, PhaseState};
use trishape::shape::lift_to_configuration;
use trishape::{MassSystem, PlanarConfig, ShapePoint};

fn default_run(stop_ratio: f64, dense: usize) -> (MassSystem, Trajectory) {
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let s0 = sample_initial_conditions(&ms, &ICSpec::equilateral(0.3)).unwrap();
    let cfg = IntegratorConfig { stop_ratio, dense_output: dense, ..Default::default() };
    let traj = integrate(&ms, &s0, &cfg).unwrap();
    (ms, traj)
}

#[test]
fn default_scenario_is_a_vertical_plane_geodesic() {
    let (ms, traj) = default_run(1e-2, 16);
    assert_eq!(traj.start, Termination::ReachedStopRatio);
    assert_eq!(traj.end, Termination::ReachedStopRatio);
    let shapes = traj.shapes();
    for w in &shapes {
        assert!((w.norm() - 0.5).abs() <= 1e-6);
    }
    let fit = fit_vertical_plane(&shapes).unwrap();
    assert!(fit.max_residual <= 1e-5, "{fit:?}");
    let r = traj.max_scaled_residuals(&ms);
    assert!(r.max() <= 1e-8, "{r:?}");
    assert!(traj.max_inertia_deviation(1.0) <= 1e-6);
    let resampled = resample_by_arc_length(&shapes, 4000);
    let geo = jemisphere_geodesic(&shapes[0], shapes.last().unwrap(), 4000).unwrap();
    assert!(hausdorff_distance(&resampled, &geo) <= 1e-4);
}

#[test]
fn tilted_start_still_follows_a_vertical_plane() {
    let ms = MassSystem::new(vec![1.0, 2.0, 3.0], 0.5).unwrap();
    let spec = ICSpec { i0: 2.0, shape: ShapePoint::new(0.3, -0.4, 0.6), theta: 1.1 };
    let s0 = sample_initial_conditions(&ms, &spec).unwrap();
    let traj = integrate(&ms, &s0, &IntegratorConfig::default()).unwrap();
    let fit = fit_vertical_plane(&traj.shapes()).unwrap();
    assert!(fit.max_residual <= 1e-5 * spec.i0, "{fit:?}");
    // a plane missing the origin: not a meridian
    assert!(fit.c.abs() > 1e-3);
}

#[test]
fn endpoint_angle_is_stable_under_stop_refinement() {
    let (ms, coarse) = default_run(1e-2, 0);
    let (_, fine) = default_run(1e-3, 0);
    let a = endpoint_analysis(&ms, &coarse).unwrap();
    let b = endpoint_analysis(&ms, &fine).unwrap();
    assert!(line_angle_difference(a.angle_between, b.angle_between).abs() <= 5e-3);
    assert!(b.start_ratio < 1e-3 && b.end_ratio < 1e-3);
}

#[test]
fn time_reversal_retraces_the_path() {
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let s0 = sample_initial_conditions(&ms, &ICSpec::equilateral(0.9)).unwrap();
    let cfg = IntegratorConfig { direction: Direction::Forward, stop_ratio: 0.2, ..Default::default() };
    let fwd = integrate(&ms, &s0, &cfg).unwrap();
    let last = fwd.samples.last().unwrap().state.clone();
    let reversed = PhaseState::new(last.q.clone(), last.v.iter().map(|v| -v).collect(), 0.0).unwrap();
    let back_cfg = IntegratorConfig { max_time: last.t, stop_ratio: 1e-9, dense_output: 20, ..cfg };
    let back = integrate(&ms, &reversed, &back_cfg).unwrap();
    // compare at the sample whose time is closest to the original start
    let end = back.samples.iter().min_by(|a, b| (a.t() - last.t).abs().total_cmp(&(b.t() - last.t).abs())).unwrap();
    let dt = end.t() - last.t;
    let grad = potential_gradient(&ms, &s0.q).unwrap();
    for (a, p) in end.state.q.points().iter().enumerate() {
        // second-order Taylor correction for the small time offset
        let acc = -grad[a] / ms.masses()[a];
        let expected = s0.q.points()[a] - s0.v[a] * dt + acc * (0.5 * dt * dt);
        assert!((p - expected).norm() < 1e-8, "{p:?} {expected:?} {dt}");
    }
}

#[test]
fn nonzero_energy_gives_parabolic_inertia() {
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let s0 = sample_with_kinetic_factor(&ms, &ICSpec::equilateral(0.4), 1.5).unwrap();
    let cfg = IntegratorConfig { stop_ratio: 0.05, dense_output: 3, ..Default::default() };
    let traj = integrate(&ms, &s0, &cfg).unwrap();
    let h = traj.samples[0].conserved.energy.unwrap();
    assert!(h > 0.0);
    assert!(lagrange_jacobi_check(&traj).unwrap() < 1e-4);
    // İ(0) = 0, so I(t) = I0 + 2Ht²
    for s in &traj.samples {
        let t = s.t();
        assert!((s.conserved.inertia - (1.0 + 2.0 * h * t * t)).abs() < 1e-8 * (1.0 + 2.0 * h * t * t));
    }
}

#[test]
fn time_rescaling_traces_the_same_shapes() {
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let s0 = sample_initial_conditions(&ms, &ICSpec::equilateral(0.3)).unwrap();
    let plain = integrate(&ms, &s0, &IntegratorConfig { stop_ratio: 1e-3, ..Default::default() }).unwrap();
    let cfg = IntegratorConfig { stop_ratio: 1e-3, time_rescaling: true, ..Default::default() };
    let rescaled = integrate(&ms, &s0, &cfg).unwrap();
    let fit = fit_vertical_plane(&rescaled.shapes()).unwrap();
    assert!(fit.max_residual <= 1e-5);
    let t_plain = plain.samples.last().unwrap().t();
    let t_rescaled = rescaled.samples.last().unwrap().t();
    assert!((t_plain - t_rescaled).abs() < 1e-5 * t_plain, "{t_plain} {t_rescaled}");
    assert!(rescaled.max_scaled_residuals(&ms).max() <= 1e-8);
}

#[test]
fn jm_length_equals_reduced_hyperbolic_length() {
    let (ms, traj) = default_run(0.05, 16);
    let path: Vec<PlanarConfig> = traj.samples.iter().map(|s| s.state.q.clone()).collect();
    let upstairs = jm_length(&ms, &path).unwrap();
    let downstairs = hyperbolic_length(&traj.shapes(), ms.reduced_metric_scale().unwrap());
    assert!((upstairs - downstairs).abs() <= 1e-4 * upstairs, "{upstairs} {downstairs}");
}

#[test]
fn jm_length_converges_at_second_order() {
    // straight-line path between two lifted shapes, sampled at n and 2n points
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let a = lift_to_configuration(&ms, &ShapePoint::new(0.1, 0.2, 0.4)).unwrap();
    let b = lift_to_configuration(&ms, &ShapePoint::new(-0.2, 0.1, 0.35)).unwrap();
    let path = |n: usize| -> Vec<PlanarConfig> {
        (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                PlanarConfig(a.points().iter().zip(b.points()).map(|(p, q)| p + (q - p) * s).collect())
            })
            .collect()
    };
    let l1 = jm_length(&ms, &path(50)).unwrap();
    let l2 = jm_length(&ms, &path(100)).unwrap();
    let l4 = jm_length(&ms, &path(200)).unwrap();
    let order = ((l1 - l2) / (l2 - l4)).log2();
    assert!(order > 1.8, "observed order {order}");
    // Richardson bound for the finer value
    assert!((l4 - l2).abs() <= (l2 - l1).abs());
    assert!(moment_of_inertia(&ms, &a) > 0.0);
}

#[test]
fn collinear_start_is_rejected() {
    let ms = MassSystem::equal(3, 1.0).unwrap();
    let spec = ICSpec { i0: 1.0, shape: ShapePoint::new(0.5, 0.0, 0.0), theta: 0.0 };
    assert!(matches!(sample_initial_conditions(&ms, &spec), Err(trishape::Error::DegenerateStart(_))));
}
