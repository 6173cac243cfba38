use mbgf::linalg::dist;
use mbgf::problems::{scalar_pair, strongly_convex};
use mbgf::{
    builtin, integrate_accelerated, integrate_first_order, AccelScheme, FlowConfig, ScalingRule,
    BUILTIN_NAMES,
};

// On p4 from x > 1 only f2 is active: x' = -2(x - 1), so x(t) = 1 + (x0 - 1) e^{-2t}.
fn scalar_pair_final(dt: f64) -> f64 {
    let p = scalar_pair::<f64>();
    let cfg = FlowConfig::first_order(1.0, dt);
    let traj = integrate_first_order(&p, &ScalingRule::unit(), &[3.0], &cfg).unwrap();
    assert_eq!(traj.last().t, 1.0);
    traj.last().x[0]
}

#[test]
fn rk4_is_fourth_order_on_a_smooth_segment() {
    let exact = 1.0 + 2.0 * (-2.0f64).exp();
    let coarse = (scalar_pair_final(0.1) - exact).abs();
    let fine = (scalar_pair_final(0.05) - exact).abs();
    let order = (coarse / fine).log2();
    assert!((3.7..4.3).contains(&order), "observed order {order}");
    assert!(coarse < 1e-5);
}

#[test]
fn trajectories_descend_and_stay_in_the_initial_level_set() {
    for name in BUILTIN_NAMES {
        let p = builtin::<f64>(name).unwrap();
        for x0 in &p.start_points {
            for rule in [
                ScalingRule::unit(),
                ScalingRule::gradnorm_clamped(0.1, 0.5, 10.0).unwrap(),
            ] {
                let cfg = FlowConfig::first_order(5.0, 1e-3).with_record_every(50);
                let traj = integrate_first_order(&p, &rule, x0, &cfg).unwrap();
                let m = &traj.monitors;
                assert_eq!(m.nesting_violations, 0, "{name} {x0:?} {rule}");
                assert_eq!(m.descent_violations, 0, "{name} {x0:?} {rule}");

                let f0 = p.evaluate(x0).unwrap();
                let level = p.level_set_bound(&f0).unwrap();
                for pair in traj.records.windows(2) {
                    for (a, b) in pair[0].f.iter().zip(&pair[1].f) {
                        assert!(b <= &(a + 1e-12), "{name}: f increased");
                    }
                }
                for r in &traj.records {
                    assert!(
                        level.bounds.excess(&r.x) <= 1e-12,
                        "{name}: left the level set"
                    );
                }
            }
        }
    }
}

#[test]
fn scaled_criticality_decays_on_the_strongly_convex_problem() {
    let p = strongly_convex::<f64>();
    let cfg = FlowConfig::first_order(10.0, 1e-3).with_record_every(100);
    let traj = integrate_first_order(&p, &ScalingRule::unit(), &[0.5, 1.5], &cfg).unwrap();
    // The limit is (0.5, 0) and the distance contracts like e^{-t}.
    let d = dist(&traj.last().x, &[0.5, 0.0]);
    assert!(d <= 1.5 * (-10.0f64).exp() * 1.01, "distance {d}");
}

#[test]
fn damping_four_makes_the_weighted_kinetic_integral_converge() {
    let p = strongly_convex::<f64>();
    let cfg = FlowConfig::accelerated(80.0, 1e-3, 4.0, 1.0)
        .with_record_every(100)
        .with_scheme(AccelScheme::Proximal);
    let traj = integrate_accelerated(&p, &ScalingRule::unit(), &[3.0, 1.0], &cfg).unwrap();
    let at = |t: f64| {
        traj.records
            .iter()
            .find(|r| r.t >= t - 1e-9)
            .unwrap()
            .weighted_kinetic
    };
    let increments: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
        .windows(2)
        .map(|w| at(w[1]) - at(w[0]))
        .collect();
    assert!(at(80.0).is_finite());
    for w in increments.windows(2) {
        assert!(w[1] <= w[0], "tail increments {increments:?}");
    }
    assert!(
        increments[2] < 0.05 * at(80.0),
        "tail increments {increments:?}"
    );
}

#[test]
fn single_precision_tracks_double_precision() {
    let p64 = strongly_convex::<f64>();
    let p32 = strongly_convex::<f32>();
    let t64 = integrate_first_order(
        &p64,
        &ScalingRule::unit(),
        &[3.0, 1.0],
        &FlowConfig::first_order(2.0, 1e-2),
    )
    .unwrap();
    let t32 = integrate_first_order(
        &p32,
        &ScalingRule::unit(),
        &[3.0, 1.0],
        &FlowConfig::first_order(2.0, 1e-2),
    )
    .unwrap();
    let a = &t64.last().x;
    let b: Vec<f64> = t32.last().x.iter().map(|&v| v as f64).collect();
    assert!(dist(a, &b) < 1e-5);
}
