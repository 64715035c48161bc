use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use s3forge::pentagon::*;
use s3forge::s3core::*;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

fn c1() -> impl Strategy<Value = (f64, f64)> {
    (0.05..FRAC_PI_2 - 0.05, 0.05..FRAC_PI_2 - 0.05)
}

/// Intersection of the great circle through y± with {x₂ = 0}, nearest to y+.
fn alpha_midpoint_oracle(l: f64, omega: f64) -> Vec4 {
    let (yp, ym) = y_pm(l, omega);
    let u = normalize(ym - yp * yp.dot(&ym));
    let t = (-yp[1]).atan2(u[1]);
    let t = if t < 0.0 { t + PI } else { t };
    yp * t.cos() + u * t.sin()
}

#[test]
fn delta_edge_examples() {
    let d = edge_delta(FRAC_PI_2, 1.0);
    assert!((d.end - V_PLUS).norm() < 1e-15);
    for sign in [1.0, -1.0] {
        assert!((edge_delta(1.1, sign).start - K).norm() < 1e-15);
    }
    let z = edge_delta(PI / 3.0, 1.0).end;
    let s = 3f64.sqrt() / 2.0 * FRAC_1_SQRT_2;
    assert!((z - Vec4::new(s, s, 0.0, 0.5)).norm() < 1e-15);
    assert_abs_diff_eq!(z.norm(), 1.0, epsilon = 1e-15);
}

#[test]
fn beta_examples() {
    assert!((beta_point(1.0, 0.5, 1.0, 0.0) - z_pm(1.0, 1.0)).norm() < 1e-15);
    for r in [0.0, 0.3, 0.9, 1.4] {
        assert!(beta_point(FRAC_PI_2, 0.7, 1.0, r).dot(&K).abs() < 1e-15);
        assert!(beta_point(FRAC_PI_2, 0.7, -1.0, r).dot(&K).abs() < 1e-15);
    }
    for &(l, w) in &[(0.4, 0.3), (1.2, 1.1), (FRAC_PI_2, 0.2)] {
        for k in 0..=20 {
            let r = FRAC_PI_2 * k as f64 / 20.0;
            assert!(beta_point(l, w, 1.0, r).dot(&I) > 0.0);
        }
    }
}

#[test]
fn r_bar_examples() {
    assert_abs_diff_eq!(r_bar(FRAC_PI_3, FRAC_PI_4), 0.68472, epsilon = 1e-5);
    assert!(r_bar_residual(FRAC_PI_3, FRAC_PI_4, r_bar(FRAC_PI_3, FRAC_PI_4)).abs() < 1e-12);
    assert_abs_diff_eq!(r_bar(FRAC_PI_2 - 1e-9, 1e-9), FRAC_PI_4, epsilon = 1e-8);
}

#[test]
fn y_vertex_limit_and_tangency() {
    let (yp, ym) = y_pm(FRAC_PI_2 - 1e-9, 1e-9);
    assert!((yp - I).norm() < 1e-8);
    assert!((ym + I).norm() < 1e-8);
    let (l, w) = (FRAC_PI_3, FRAC_PI_4);
    let (yp, ym) = y_pm(l, w);
    assert_abs_diff_eq!(yp.dot(&ym), h_bar(l, w), epsilon = 1e-14);
    let alpha = alpha_arc(l, w);
    let beta_tangent = u_pm(w, 1.0) * r_bar(l, w).cos() - z_pm(l, 1.0) * r_bar(l, w).sin();
    assert!(beta_tangent.dot(&alpha.tangent_at(0.0)).abs() < 1e-14);
}

#[test]
fn alpha_examples() {
    for w in [0.2, 0.7, 1.3] {
        let a = alpha_arc(FRAC_PI_2, w);
        for p in a.sample(20) {
            assert!(p.dot(&K).abs() < 1e-14);
        }
    }
    for &(l, w) in &[(0.4, 0.3), (1.0, 0.7), (1.4, 1.2)] {
        for p in alpha_arc(l, w).sample(40) {
            assert!(p[2] >= -1e-14 && p[3] >= -1e-14);
        }
    }
    let (l, w) = (FRAC_PI_3, FRAC_PI_4);
    let mid = alpha_arc(l, w).at(s_bar(l, w));
    let (x, _, _) = midpoint_x(l, w);
    assert!((mid - x).norm() < 1e-12);
    assert!((x - alpha_midpoint_oracle(l, w)).norm() < 1e-12);
}

#[test]
fn x_sigma_examples() {
    assert!((x_sigma(FRAC_PI_4) - normalize(K + J)).norm() < 1e-15);
    for s in [0.1, 0.7, 1.5] {
        assert_abs_diff_eq!(dist(&x_sigma(s), &K), s, epsilon = 1e-14);
    }
    assert_abs_diff_eq!(alpha_sigma(0.6).length(), PI, epsilon = 1e-15);
}

#[test]
fn midpoint_examples() {
    let (x, _, d) = midpoint_x(FRAC_PI_3, FRAC_PI_4);
    let oracle = Vec4::new(0.25820, 0.0, 0.73030, 0.63246);
    assert!((x - oracle).abs().max() < 1e-5);
    assert_abs_diff_eq!(d, 0.88608, epsilon = 1e-5);
    assert_eq!(x[1], 0.0);
}

#[test]
fn right_angles_at_reference_parameters() {
    let p = pentagon_lw(FRAC_PI_3, FRAC_PI_4).unwrap();
    assert!(p.right_angle_residual() < 1e-10);
    assert!(p.closure_residual() < 1e-12);
    assert!(p.mirror_residual() < 1e-12);
}

#[test]
fn sigma_limit_of_the_family() {
    let sigma = 0.9;
    let target = pentagon_sigma(sigma).unwrap().samples(12);
    let mut gaps = Vec::new();
    for w in [1e-2, 1e-3, 1e-4] {
        let l = FRAC_PI_2 - w / sigma.tan();
        let p = pentagon_lw(l, w).unwrap().samples(12);
        let gap = p
            .iter()
            .map(|a| target.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1]);
    assert!(gaps[2] < 1e-2);
}

#[test]
fn hexagon_examples() {
    assert_abs_diff_eq!(hexagon_l(FRAC_PI_3).unwrap(), FRAC_PI_3, epsilon = 1e-15);
    for w in [0.3, 0.8, 1.4] {
        let l = hexagon_l(w).unwrap();
        assert!(hexagon_residual(l, w).abs() < 1e-14);
        assert!((2.0 * r_bar(l, w) - l).abs() < 1e-10);
    }
}

#[test]
fn pi_sphere_examples() {
    let w = FRAC_PI_3;
    let l = hexagon_l(w).unwrap();
    let p = pentagon_lw(l, w).unwrap();
    let (plus, minus) = pi_spheres(w);
    assert!(plus.side(&p.x).abs() < 1e-12 && plus.side(&p.z_plus).abs() < 1e-12);
    assert!(minus.side(&p.x).abs() < 1e-12 && minus.side(&p.z_minus).abs() < 1e-12);
    assert_abs_diff_eq!(
        sphere_angle(&plus, &GeodesicSphere::s2()).unwrap(),
        FRAC_PI_3,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(sphere_angle(&minus, &plus).unwrap(), FRAC_PI_3, epsilon = 1e-12);
}

#[test]
fn face_normal_examples() {
    let (_, _, angle) = face_normals(FRAC_PI_4, FRAC_PI_4);
    assert_abs_diff_eq!(angle, FRAC_PI_4, epsilon = 1e-12);
    for i in 1..=5 {
        for j in 1..=5 {
            let (l, w) = (i as f64 * 0.25, j as f64 * 0.25);
            let (jx, ja, _) = face_normals(l, w);
            let c = jx.dot(&ja);
            assert!(c > 0.0 && c < 1.0, "({l}, {w}) -> {c}");
        }
    }
    let (jx, _, _) = face_normals(0.5, FRAC_PI_2 - 0.5);
    assert!((jx - E).norm() < 1e-14);
}

#[test]
fn tau_examples() {
    assert!(tau_of(0.4, FRAC_PI_2 - 0.4).abs() < 1e-15);
    for w in [0.2, 0.9, 1.4] {
        assert_abs_diff_eq!(level_l(0.0, w).unwrap(), FRAC_PI_2 - w, epsilon = 1e-12);
    }
    let t = tau_of(FRAC_PI_3, FRAC_PI_4);
    assert_abs_diff_eq!(t, 0.33984, epsilon = 1e-5);
    assert_abs_diff_eq!(level_l(t, FRAC_PI_4).unwrap(), FRAC_PI_3, epsilon = 1e-10);
}

#[test]
fn theta_beta_examples() {
    assert_abs_diff_eq!(theta_beta_closedform(FRAC_PI_3, FRAC_PI_4), 0.95532, epsilon = 1e-5);
    for l in [0.2, 0.7, 1.3] {
        assert_abs_diff_eq!(theta_beta_closedform(l, FRAC_PI_2 - l), FRAC_PI_4, epsilon = 1e-12);
    }
    for i in 1..10 {
        for j in 1..10 {
            let v = theta_beta_closedform(i as f64 * 0.157, j as f64 * 0.157);
            assert!(v > 0.0 && v < FRAC_PI_2);
        }
    }
}

#[test]
fn polyhedron_examples() {
    let p = pentagon_lw(FRAC_PI_3, FRAC_PI_4).unwrap();
    let u = polyhedron(&p).unwrap();
    assert!(p.samples(30).iter().all(|q| u.contains(q)));
    assert!(!u.contains(&E) && !u.contains(&-E));
    let s = polyhedron(&pentagon_sigma(FRAC_PI_4).unwrap()).unwrap();
    let n: Vec<Vec4> = s.faces.iter().map(|f| f.0.normal).collect();
    assert!(n[0].dot(&n[1]).abs() < 1e-15 && n[0].dot(&n[2]).abs() < 1e-15);
    assert!(n[2].dot(&x_sigma(FRAC_PI_4)).abs() < 1e-15);
    assert!(pentagon_sigma(FRAC_PI_4)
        .unwrap()
        .samples(30)
        .iter()
        .all(|q| s.contains(q)));
}

#[test]
fn region_classification() {
    assert_eq!(classify(FRAC_PI_4, FRAC_PI_4), Region::Diag);
    assert_eq!(classify(1.2, 1.0), Region::Tplus);
    assert_eq!(classify(0.3, 0.3), Region::Tminus);
    assert_eq!(classify(2.0, -0.5), Region::C2);
    assert_eq!(classify(FRAC_PI_2, 0.4), Region::AxisLine);
    assert!(pentagon_lw(FRAC_PI_2, 0.0).is_err());
    assert!(pentagon_lw(3.5, 0.1).is_err());
    assert!(pentagon_sigma(2.0).is_err());
}

proptest! {
    #[test]
    fn pentagon_angles_and_lengths((l, w) in c1()) {
        let p = pentagon_lw(l, w).unwrap();
        prop_assert!(p.right_angle_residual() < 1e-10);
        prop_assert!((p.delta_plus.length() - l).abs() < 1e-12);
        prop_assert!((p.delta_minus.length() - l).abs() < 1e-12);
        prop_assert!((p.beta_plus.length() - r_bar(l, w)).abs() < 1e-12);
        prop_assert!((p.alpha.length() - 2.0 * s_bar(l, w)).abs() < 1e-12);
    }

    #[test]
    fn r3_congruence((l, w) in c1()) {
        let a = pentagon_lw(l, w).unwrap();
        let b = pentagon_lw(l, -w).unwrap();
        let r3 = reflect(&GeodesicSphere::s3());
        for (p, q) in a.vertices().iter().zip(b.vertices().iter()) {
            prop_assert!((r3.apply(q) - p).norm() < 1e-12);
        }
        prop_assert!((r3.apply(&b.x) - a.x).norm() < 1e-12);
    }

    #[test]
    fn beta_edges_meet_delta_and_alpha_orthogonally((l, w) in c1()) {
        let p = pentagon_lw(l, w).unwrap();
        let rb = r_bar(l, w);
        prop_assert!((dist(&p.y_plus, &p.z_plus) - rb).abs() < 1e-12);
        prop_assert!((dist(&p.y_minus, &p.z_minus) - rb).abs() < 1e-12);
        let b0 = p.beta_plus.tangent_at(0.0);
        let d1 = p.delta_plus.tangent_at(p.delta_plus.length());
        let b1 = p.beta_plus.tangent_at(rb);
        let a0 = p.alpha.tangent_at(0.0);
        prop_assert!(b0.dot(&d1).abs() < 1e-10);
        prop_assert!(b1.dot(&a0).abs() < 1e-10);
    }

    #[test]
    fn h_at_r_bar_is_scan_minimum((l, w) in c1()) {
        let rb = r_bar(l, w);
        prop_assert!((h_of_r(l, w, rb) - h_bar(l, w)).abs() < 1e-12);
        prop_assert!(r_bar_residual(l, w, rb).abs() < 1e-12);
        let upper = FRAC_PI_2;
        let steps = (upper / 1e-4) as usize;
        let scan = (0..=steps)
            .map(|k| h_of_r(l, w, k as f64 * 1e-4))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(h_of_r(l, w, rb) <= scan + 1e-12);
    }

    #[test]
    fn level_curve_round_trip(tau in 0.02..1.5f64, f in 0.01..0.99f64) {
        let lo = level_omega_min(tau);
        let w = lo + f * (FRAC_PI_2 - lo);
        let l = level_l(tau, w).unwrap();
        prop_assert!((tau_of(l, w) - tau).abs() < 1e-10);
    }

    #[test]
    fn diagonal_midpoint_is_constant(l in 0.01..FRAC_PI_2 - 0.01) {
        let (x, _, _) = midpoint_x(l, FRAC_PI_2 - l);
        prop_assert!((x - Vec4::new(0.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-12);
        let (_, _, angle) = face_normals(l, FRAC_PI_2 - l);
        prop_assert!((angle - l).abs() < 1e-10);
    }

    #[test]
    fn level_curve_slope_is_steep(tau in 0.02..1.5f64, f in 0.02..0.98f64) {
        let lo = level_omega_min(tau);
        let w = lo + f * (FRAC_PI_2 - lo);
        prop_assert!(level_l_derivative(tau, w).unwrap().abs() >= 1.0 - 1e-9);
    }
}
