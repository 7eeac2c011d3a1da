use super::filters::{
    central_residual, quotient_zero_residual, random_configuration, random_frame_configuration, random_line_configuration,
    sigma_residual, theta_zero_residual,
};
use super::*;
use crate::jacobi::enumerate_connected;
use crate::sampling::stream;
use proptest::prelude::*;

fn two_leg_diagrams(n: usize) -> Vec<JacobiDiagram> {
    enumerate_connected(n, &Support::two_lines(), 0)
        .unwrap()
        .into_iter()
        .filter(|g| g.legs_on(1) == 2 && g.legs_on(0) > 1 && !has_coplanar_pair(g))
        .collect()
}

#[test]
fn cross_chord_density_matches_kernel() {
    let g = cross_chord();
    let plan = EdgeOrientationPlan::standard(&g);
    for (theta, t) in [(0.0, 0.3), (0.0, -2.0), (1.1, 0.7), (4.0, 5.0)] {
        let c = AnomalyConfiguration::on_frame(TwoStrandFrame::new(theta), vec![0.0, t], vec![]);
        // edge (cos, sin, -t), d/dtheta (-sin, cos, 0), d/dt (0, 0, -1)
        let v: V3 = [f64::cos(theta), f64::sin(theta), -t];
        let d1 = [-f64::sin(theta), f64::cos(theta), 0.0];
        let d2 = [0.0, 0.0, -1.0];
        let kernel = vec3::det3(v, d1, d2) / (4.0 * PI * vec3::norm(v).powi(3));
        let d = anomaly_density(&c, &g, &plan).unwrap();
        assert!((d - kernel).abs() < 1e-9, "{d} vs {kernel}");
        assert!((d + 1.0 / (4.0 * PI * (1.0 + t * t).powf(1.5))).abs() < 1e-12);
    }
}

#[test]
fn frame_rotation_with_strand_swap_pairs_densities() {
    let g = cross_chord();
    let s = g.swap_lines();
    let (pg, ps) = (EdgeOrientationPlan::standard(&g), EdgeOrientationPlan::standard(&s));
    for (theta, t) in [(0.2, 0.5), (2.5, -1.5), (5.9, 3.0)] {
        let c = AnomalyConfiguration::on_frame(TwoStrandFrame::new(theta), vec![0.0, t], vec![]);
        let params = s.legs.iter().map(|l| if l.component == 0 { 0.0 } else { t }).collect();
        let paired = AnomalyConfiguration::on_frame(TwoStrandFrame::new(theta + PI), params, vec![]);
        let (a, b) = (anomaly_density(&c, &g, &pg).unwrap(), anomaly_density(&paired, &s, &ps).unwrap());
        assert!((a - b).abs() < 1e-14 * a.abs());
    }
}

#[test]
fn gauge_translate_has_equal_density() {
    let mut rng = stream(5, 0);
    for g in two_leg_diagrams(3).iter().take(4) {
        let plan = EdgeOrientationPlan::standard(g);
        for _ in 0..20 {
            let c = random_frame_configuration(g, &mut rng);
            let moved = c.translated(g, 0.37).regauged(g).unwrap();
            let (a, b) = (anomaly_density(&c, g, &plan).unwrap(), anomaly_density(&moved, g, &plan).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a} vs {b}");
        }
    }
}

#[test]
fn validate_rejects_bad_gauge_and_order() {
    let g = cross_chord();
    let c = AnomalyConfiguration::on_frame(TwoStrandFrame::new(0.0), vec![0.5, 1.0], vec![]);
    assert!(matches!(c.validate(&g), Err(AnomalyError::InvalidConfiguration(_))));
    let g = enumerate_connected(2, &Support::two_lines(), 0).unwrap().into_iter().find(|g| g.legs_on(0) > 0 && g.legs_on(1) > 1).unwrap();
    let mut c = random_configuration(&g, &mut stream(1, 0));
    let i = (0..g.n_legs()).find(|&i| g.legs[i].component == 1 && g.legs[i].rank == 0).unwrap();
    c.leg_params[i] = 100.0;
    assert!(c.validate(&g).is_err());
}

#[test]
fn sigma_is_an_involution_and_reverses_edges() {
    let mut rng = stream(11, 0);
    for g in two_leg_diagrams(3) {
        let plan = EdgeOrientationPlan::standard(&g);
        let legs: Vec<usize> = (0..g.n_legs()).filter(|&i| g.legs[i].component == 1).collect();
        let edge_of = |i: usize| plan.edges.iter().position(|&(a, b)| a == HalfEdge::Leg(i) || b == HalfEdge::Leg(i)).unwrap();
        let (e1, e2) = (edge_of(legs[0]), edge_of(legs[1]));
        for _ in 0..200 {
            let c = random_configuration(&g, &mut rng);
            let s = sigma(&c, &g).unwrap();
            assert_eq!(sigma(&s, &g).unwrap(), c);
            let (a, b) = (anomaly_gauss_map(&c, &g, &plan).unwrap(), anomaly_gauss_map(&s, &g, &plan).unwrap());
            for e in 0..a.len() {
                let expected = if e == e1 { vec3::neg(a[e2]) } else if e == e2 { vec3::neg(a[e1]) } else { a[e] };
                assert!(vec3::norm(vec3::sub(b[e], expected)) < 1e-14);
            }
        }
    }
}

#[test]
fn sigma_flips_the_quotient_density() {
    let mut rng = stream(12, 0);
    for g in two_leg_diagrams(3) {
        let plan = EdgeOrientationPlan::standard(&g);
        for _ in 0..200 {
            let c = random_configuration(&g, &mut rng);
            assert!(sigma_residual(&c, &g, &TwoStrandDensity::new(&g, &plan).unwrap()).unwrap() < 1e-9);
        }
    }
}

#[test]
fn sigma_needs_two_strand2_legs() {
    let g = cross_chord();
    let c = AnomalyConfiguration::on_frame(TwoStrandFrame::new(0.0), vec![0.0, 1.0], vec![]);
    assert!(matches!(sigma(&c, &g), Err(AnomalyError::WrongLegCount { expected: 2, found: 1 })));
}

#[test]
fn one_leg_scaling_fixes_gauss_map() {
    let g = enumerate_connected(3, &Support::two_lines(), 0)
        .unwrap()
        .into_iter()
        .find(|g| g.legs_on(1) == 1 && g.n_tri > 0)
        .unwrap();
    let plan = EdgeOrientationPlan::standard(&g);
    let mut rng = stream(13, 0);
    for mu in [0.01, 0.5, 3.0, 70.0] {
        let c = random_configuration(&g, &mut rng);
        let m = mu_action(&c, &g, mu).unwrap();
        let (a, b) = (anomaly_gauss_map(&c, &g, &plan).unwrap(), anomaly_gauss_map(&m, &g, &plan).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!(vec3::norm(vec3::sub(*x, *y)) < 1e-14);
        }
        assert!(quotient_zero_residual(&c, &TwoStrandDensity::new(&g, &plan).unwrap()).unwrap() < 1e-12);
    }
}

#[test]
fn coplanar_pairs_give_zero_density() {
    let mut rng = stream(14, 0);
    let gs: Vec<_> = enumerate_connected(3, &Support::two_lines(), 0).unwrap().into_iter().filter(|g| has_coplanar_pair(g) && g.legs_on(0) > 0).collect();
    assert!(!gs.is_empty());
    for g in gs {
        let plan = EdgeOrientationPlan::standard(&g);
        for _ in 0..50 {
            let c = random_frame_configuration(&g, &mut rng);
            assert!(theta_zero_residual(&c, &TwoStrandDensity::new(&g, &plan).unwrap()).unwrap() < 1e-12);
        }
    }
}

#[test]
fn central_symmetry_sign() {
    let mut rng = stream(15, 0);
    for n in 1..=3 {
        for g in enumerate_connected(n, &Support::two_lines(), 0).unwrap().iter().take(6) {
            let line = include_on_line(g).unwrap();
            let plan = EdgeOrientationPlan::standard(&line);
            for _ in 0..20 {
                let q = random_line_configuration(&line, &mut rng);
                assert!(central_residual(&q, &line, &plan).unwrap() < 1e-9);
            }
        }
    }
}

#[test]
fn filters_degree_one_to_three() {
    let r1 = check_vanishing_filters(1, 20, 1).unwrap();
    assert_eq!(r1.diagrams, 3);
    assert_eq!(r1.survivors.len(), 1);
    assert!(r1.passed);
    for n in [2, 3] {
        let r = check_vanishing_filters(n, 20, 1).unwrap();
        assert!(r.survivors.is_empty(), "degree {n}");
        assert!(r.passed, "degree {n}: {}", r.max_residual);
    }
    assert!(matches!(check_vanishing_filters(6, 1, 0), Err(AnomalyError::UnsupportedDegree(6))));
}

#[test]
fn alpha1_is_one() {
    let est = estimate_alpha1(&SamplerConfig::monte_carlo(200_000, 3)).unwrap();
    assert!((est.value - 1.0).abs() < 3.0 * est.std_error + 1e-3, "{est:?}");
    assert!(est.std_error < 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn sigma_antisymmetry_degree_three(seed in 0u64..1_000_000, pick in 0usize..64) {
        let gs = two_leg_diagrams(3);
        let g = &gs[pick % gs.len()];
        let plan = EdgeOrientationPlan::standard(g);
        let c = random_configuration(g, &mut stream(seed, 0));
        prop_assert!(sigma_residual(&c, g, &TwoStrandDensity::new(g, &plan).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn one_leg_scaling_keeps_gauss_map(seed in 0u64..1_000_000, log_mu in -5.0f64..5.0, pick in 0usize..64) {
        let gs: Vec<_> = enumerate_connected(3, &Support::two_lines(), 0)
            .unwrap()
            .into_iter()
            .filter(|g| g.legs_on(1) == 1 && g.legs_on(0) > 0)
            .collect();
        let g = &gs[pick % gs.len()];
        let plan = EdgeOrientationPlan::standard(g);
        let c = random_configuration(g, &mut stream(seed, 0));
        let m = mu_action(&c, g, log_mu.exp()).unwrap();
        let (a, b) = (anomaly_gauss_map(&c, g, &plan).unwrap(), anomaly_gauss_map(&m, g, &plan).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(vec3::norm(vec3::sub(*x, *y)) < 1e-14);
        }
    }

    #[test]
    fn central_symmetry_pointwise(seed in 0u64..1_000_000, n in 1usize..=3, pick in 0usize..1000) {
        let gs = enumerate_connected(n, &Support::two_lines(), 0).unwrap();
        let line = include_on_line(&gs[pick % gs.len()]).unwrap();
        let plan = EdgeOrientationPlan::standard(&line);
        let q = random_line_configuration(&line, &mut stream(seed, 0));
        prop_assert!(central_residual(&q, &line, &plan).unwrap() < 1e-9);
    }

    #[test]
    fn coplanar_density_vanishes(seed in 0u64..1_000_000, pick in 0usize..64) {
        let gs: Vec<_> = enumerate_connected(3, &Support::two_lines(), 0)
            .unwrap()
            .into_iter()
            .filter(|g| has_coplanar_pair(g) && g.legs_on(0) > 0)
            .collect();
        let g = &gs[pick % gs.len()];
        let plan = EdgeOrientationPlan::standard(g);
        let c = random_frame_configuration(g, &mut stream(seed, 0));
        prop_assert!(theta_zero_residual(&c, &TwoStrandDensity::new(g, &plan).unwrap()).unwrap() < 1e-12);
    }
}
