use mbgf::geometry::{
    hausdorff_hull_distance, min_norm_point, project_onto_hull, support_point, CERTIFICATE_TOL,
};
use mbgf::linalg::{add, combine, dist, dot, norm, scale, sub};
use mbgf::solve_implicit_acceleration;
use mbgf::verify::{brute_force_min_norm, random_instance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generators() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=3, 1usize..=4)
        .prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), m))
}

fn query(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0f64..6.0, n)
}

fn hull_and_query() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    generators().prop_flat_map(|g| {
        let n = g[0].len();
        (Just(g), query(n))
    })
}

fn hull_and_two_queries() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    generators().prop_flat_map(|g| {
        let n = g[0].len();
        (Just(g), query(n), query(n))
    })
}

fn two_hulls() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1usize..=3, 1usize..=4, 1usize..=4).prop_flat_map(|(n, m1, m2)| {
        let hull = |m| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), m);
        (hull(m1), hull(m2))
    })
}

fn scale_of(g: &[Vec<f64>], q: &[f64]) -> f64 {
    g.iter().map(|v| norm(v)).fold(norm(q), f64::max).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn projection_is_certified((g, q) in hull_and_query()) {
        let p = project_onto_hull(&q, &g).unwrap();
        let s = scale_of(&g, &q);
        prop_assert!(p.certificate_violation(&q, &g) <= CERTIFICATE_TOL * s * s);
        let w = p.weights.as_slice();
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist(&combine(w, &g), &p.point) <= 1e-9 * s);
    }

    #[test]
    fn min_norm_point_beats_every_generator(g in generators()) {
        let p = min_norm_point(&g).unwrap();
        for v in &g {
            prop_assert!(p.norm() <= norm(v) + 1e-12);
        }
    }

    #[test]
    fn weight_perturbations_do_not_improve((g, q) in hull_and_query()) {
        let p = project_onto_hull(&q, &g).unwrap();
        let base = dist(&p.point, &q);
        let w = p.weights.as_slice();
        for i in 0..g.len() {
            for j in (0..g.len()).filter(|&j| j != i) {
                let mut v = w.to_vec();
                v[i] += 1e-3;
                v[j] -= 1e-3;
                if v[j] >= 0.0 {
                    let moved = dist(&combine(&v, &g), &q);
                    prop_assert!(moved >= base - 1e-8, "moved {moved} base {base}");
                }
            }
        }
    }

    #[test]
    fn projection_is_idempotent((g, q) in hull_and_query()) {
        let p = project_onto_hull(&q, &g).unwrap();
        let again = project_onto_hull(&p.point, &g).unwrap();
        prop_assert!(dist(&again.point, &p.point) <= 1e-9 * scale_of(&g, &q));
    }

    #[test]
    fn projection_is_nonexpansive((g, q1, q2) in hull_and_two_queries()) {
        let p1 = project_onto_hull(&q1, &g).unwrap();
        let p2 = project_onto_hull(&q2, &g).unwrap();
        prop_assert!(dist(&p1.point, &p2.point) <= dist(&q1, &q2) + 1e-9);
    }

    #[test]
    fn support_point_maximizes((g, b) in hull_and_query()) {
        let s = support_point(&b, &g).unwrap();
        let best = dot(&b, &s.projection.point);
        for v in &g {
            prop_assert!(dot(&b, v) <= best + 1e-9 * scale_of(&g, &b).powi(2));
        }
    }

    #[test]
    fn hausdorff_is_a_symmetric_distance((a, b) in two_hulls()) {
        let ab = hausdorff_hull_distance(&a, &b).unwrap();
        prop_assert!((ab - hausdorff_hull_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(hausdorff_hull_distance(&a, &a).unwrap() < 1e-9);
        let shift = vec![0.25; a[0].len()];
        let moved: Vec<Vec<f64>> = a.iter().map(|v| add(v, &shift)).collect();
        let d = hausdorff_hull_distance(&a, &moved).unwrap();
        prop_assert!(d <= norm(&shift) + 1e-9);
    }
}

#[test]
fn matches_brute_force_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0f64;
    for _ in 0..300 {
        let g = random_instance(&mut rng);
        let value = min_norm_point(&g).unwrap().norm();
        let reference = brute_force_min_norm(&g, 100);
        worst = worst.max((value * value - reference * reference).abs());
        assert!(value <= reference + 1e-9);
    }
    assert!(worst <= 1e-4, "worst squared-norm gap {worst}");
}

#[test]
fn implicit_acceleration_residual() {
    // x'' + b + proj_hull(-x'') = 0 on 1000 random instances
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let g = random_instance(&mut rng);
        let n = g[0].len();
        let b: Vec<f64> = (0..n)
            .map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0))
            .collect();
        let a = solve_implicit_acceleration(&g, &b).unwrap();
        let proj = project_onto_hull(&scale(&a, -1.0), &g).unwrap();
        let residual = norm(&add(&add(&a, &b), &proj.point));
        worst = worst.max(residual);
    }
    assert!(worst <= 1e-9, "worst residual {worst}");
}

#[test]
fn zero_damping_acceleration_is_the_first_order_direction() {
    let g = vec![vec![2.0, 1.0], vec![-1.0, 1.5], vec![0.5, 3.0]];
    let a = solve_implicit_acceleration(&g, &[0.0, 0.0]).unwrap();
    let p = min_norm_point(&g).unwrap();
    assert!(norm(&sub(&a, &scale(&p.point, -1.0))) < 1e-15);
}
