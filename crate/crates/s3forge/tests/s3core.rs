use approx::assert_abs_diff_eq;
use nalgebra::Vector3;
use proptest::prelude::*;
use s3forge::s3core::*;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

fn unit4() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("nonzero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|a| normalize(Vec4::new(a[0], a[1], a[2], a[3])))
}

fn frame() -> impl Strategy<Value = [Vec4; 4]> {
    (unit4(), unit4(), unit4(), unit4()).prop_filter_map("independent", |(a, b, c, d)| {
        let m = Mat4::from_columns(&[a, b, c, d]);
        if m.determinant().abs() < 1e-2 {
            return None;
        }
        let q = m.qr().q();
        let mut cols = [
            q.column(0).into(),
            q.column(1).into(),
            q.column(2).into(),
            q.column(3).into(),
        ];
        if Mat4::from_columns(&cols).determinant() < 0.0 {
            cols[3] = -cols[3];
        }
        Some(cols)
    })
}

#[test]
fn distance_examples() {
    assert_abs_diff_eq!(dist(&K, &K), 0.0);
    assert_abs_diff_eq!(dist(&E, &-E), PI, epsilon = 1e-15);
    assert_abs_diff_eq!(dist(&K, &V_PLUS), FRAC_PI_2, epsilon = 1e-15);
}

#[test]
fn great_circle_quarter_points() {
    let c = GreatCircle::new(K, V_PLUS).unwrap();
    assert!((c.point(0.0) - K).norm() < 1e-15);
    assert!((c.point(FRAC_PI_2) - V_PLUS).norm() < 1e-15);
    assert!((c.point(PI) + K).norm() < 1e-15);
}

#[test]
fn segment_examples() {
    let (c, len) = segment(&K, &V_PLUS).unwrap();
    assert_abs_diff_eq!(len, FRAC_PI_2, epsilon = 1e-15);
    assert!((c.point(len) - V_PLUS).norm() < 1e-14);
    assert!(matches!(segment(&K, &-K), Err(S3Error::AntipodalEndpoints(_))));
    let (_, len) = segment(&E, &normalize(E + I)).unwrap();
    assert_abs_diff_eq!(len, (FRAC_1_SQRT_2).acos(), epsilon = 1e-15);
}

#[test]
fn reflection_examples() {
    let r2 = reflect(&GeodesicSphere::s2());
    assert!((r2.apply(&I) + I).norm() < 1e-15);
    assert!((r2.apply(&K) - K).norm() < 1e-15);
}

#[test]
fn half_turn_about_k_v_plus() {
    let h = half_turn(&GreatCircle::new(K, V_PLUS).unwrap());
    assert!((h.apply(&I) - E).norm() < 1e-15);
    assert!((h.apply(&K) - K).norm() < 1e-15);
    assert!((h.apply(&V_PLUS) - V_PLUS).norm() < 1e-15);
    let id = rotate_about_circle(&GreatCircle::new(E, J).unwrap(), 0.0);
    assert!(id.distance(&Isometry::identity()) < 1e-15);
}

#[test]
fn killing_field_examples() {
    let f = [E, I, J, K];
    assert!(killing_eval(&f, &E).norm() < 1e-15);
    assert!((killing_eval(&f, &J) - K).norm() < 1e-15);
}

#[test]
fn helicoid_examples() {
    let h = HelicoidFrame::new(E, I, J, K, 0.7).unwrap();
    for t in [0.0, 0.4, 2.0] {
        let axis = GreatCircle::new(E, I).unwrap().point(t);
        assert!((helicoid_point(&h, 0.0, t) - axis).norm() < 1e-15);
        let polar = GreatCircle::new(J, K).unwrap().point(0.7 * t);
        assert!((helicoid_point(&h, FRAC_PI_2, t) - polar).norm() < 1e-15);
    }
    let flat = HelicoidFrame::new(E, I, J, K, 0.0).unwrap();
    for (s, t) in [(0.3, 0.2), (-1.0, 2.5), (2.0, -0.7)] {
        assert!(helicoid_point(&flat, s, t).dot(&K).abs() < 1e-15);
    }
}

#[test]
fn stereographic_examples() {
    assert_eq!(stereo(&K).unwrap(), Vector3::zeros());
    assert!((stereo(&E).unwrap() - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    assert_eq!(stereo(&-K), Err(S3Error::PoleSingularity));
}

#[test]
fn triangle_area_examples() {
    let s4 = GeodesicSphere::s4();
    assert_abs_diff_eq!(triangle_area(&E, &I, &J, &s4).unwrap(), FRAC_PI_2, epsilon = 1e-14);
    let b = normalize(E + I);
    assert!(matches!(
        triangle_area(&E, &I, &b, &s4),
        Err(S3Error::DegenerateTriangle(_))
    ));
}

#[test]
fn tiny_triangle_matches_chordal_area() {
    let h = 1e-3;
    let a = E;
    let b = normalize(E + I * h);
    let c = normalize(E + J * h);
    let girard = triangle_area(&a, &b, &c, &GeodesicSphere::s4()).unwrap();
    let flat = chordal_area(&a, &b, &c);
    assert!((girard - flat).abs() / flat < 1e-6);
}

#[test]
fn sphere_angle_examples() {
    assert_abs_diff_eq!(
        sphere_angle(&GeodesicSphere::s1(), &GeodesicSphere::s2()).unwrap(),
        FRAC_PI_2
    );
    assert_eq!(
        sphere_angle(&GeodesicSphere::s1(), &GeodesicSphere::s1()),
        Err(S3Error::IdenticalSpheres)
    );
}

#[test]
fn sphere_through_three_points() {
    let s = GeodesicSphere::through(&E, &I, &J).unwrap();
    assert!((s.normal.dot(&K).abs() - 1.0).abs() < 1e-15);
    assert!(GeodesicSphere::through(&E, &I, &normalize(E + I)).is_err());
}

#[test]
fn frame_completion_is_positive() {
    let c = GreatCircle::new(K, V_PLUS).unwrap();
    let f = c.complete_frame();
    let m = Mat4::from_columns(&f);
    assert!((m.transpose() * m - Mat4::identity()).abs().max() < 1e-14);
    assert!(m.determinant() > 0.0);
}

proptest! {
    #[test]
    fn dist_is_symmetric_and_triangular(a in unit4(), b in unit4(), c in unit4()) {
        prop_assert!((dist(&a, &b) - dist(&b, &a)).abs() < 1e-12);
        prop_assert!(dist(&a, &c) <= dist(&a, &b) + dist(&b, &c) + 1e-12);
    }

    #[test]
    fn dist_matches_chord_oracle(a in unit4(), b in unit4()) {
        let chord = (a - b).norm();
        let oracle = 2.0 * (0.5 * chord).min(1.0).asin();
        prop_assert!((dist(&a, &b) - oracle).abs() < 1e-7);
    }

    #[test]
    fn isometries_are_orthogonal(f in frame(), theta in -PI..PI) {
        let c = GreatCircle::new(f[0], f[1]).unwrap();
        for g in [rotate_about_circle(&c, theta), half_turn(&c), reflect(&GeodesicSphere::new(f[2]).unwrap())] {
            prop_assert!(g.orthogonality_residual() < 1e-12);
            let x = normalize(f[0] + f[2] * 0.3 + f[3] * 0.1);
            prop_assert!((g.apply(&x).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_fixes_axis_and_turns_polar_plane(f in frame(), theta in -PI..PI) {
        let c = GreatCircle::new(f[0], f[1]).unwrap();
        let g = rotate_about_circle(&c, theta);
        let [_, _, q, w] = c.complete_frame();
        prop_assert!((g.apply(&f[0]) - f[0]).norm() < 1e-12);
        prop_assert!((g.apply(&f[1]) - f[1]).norm() < 1e-12);
        let oracle = q * theta.cos() + w * theta.sin();
        prop_assert!((g.apply(&q) - oracle).norm() < 1e-12);
    }

    #[test]
    fn reflection_pushes_killing_field_to_itself(f in frame(), x in unit4()) {
        let c = GreatCircle::new(f[0], f[1]).unwrap();
        let frame = c.complete_frame();
        let r = reflect(&GeodesicSphere::new(f[1]).unwrap());
        let pushed = r.m * killing_eval(&frame, &x);
        let pulled = killing_eval(&frame, &r.apply(&x));
        prop_assert!((pushed - pulled).norm() < 1e-10);
    }

    #[test]
    fn killing_field_is_tangent(f in frame(), x in unit4()) {
        prop_assert!(killing_eval(&f, &x).dot(&x).abs() < 1e-12);
    }

    #[test]
    fn helicoid_rules_are_great_circles(f in frame(), pitch in -2.0..2.0f64, t in -PI..PI) {
        let h = HelicoidFrame::new(f[0], f[1], f[2], f[3], pitch).unwrap();
        let pts = [-2.0, 0.4, 1.3].map(|s| helicoid_point(&h, s, t));
        let svd = nalgebra::Matrix4x3::from_columns(&[pts[0], pts[1], pts[2]]).svd(false, false);
        prop_assert!(svd.singular_values[2] < 1e-10);
    }

    #[test]
    fn triangle_area_is_isometry_invariant(f in frame(), theta in -PI..PI, a in 0.1..1.2f64, b in 0.1..1.2f64) {
        let s4 = GeodesicSphere::s4();
        let p1 = E;
        let p2 = normalize(E * a.cos() + I * a.sin());
        let p3 = normalize(E * b.cos() + J * b.sin() + I * 0.2);
        let area = triangle_area(&p1, &p2, &p3, &s4).unwrap();
        let g = rotate_about_circle(&GreatCircle::new(f[0], f[1]).unwrap(), theta);
        let moved = GeodesicSphere::from_normal(g.apply(&K));
        let area2 = triangle_area(&g.apply(&p1), &g.apply(&p2), &g.apply(&p3), &moved).unwrap();
        prop_assert!((area - area2).abs() < 1e-10);
    }

    #[test]
    fn stereographic_round_trip(x in unit4()) {
        prop_assume!(x[3] > -0.9);
        let y = stereo(&x).unwrap();
        prop_assert!((stereo_inverse(&y) - x).norm() < 1e-12);
    }

    #[test]
    fn geodesic_triangle_angle_sum(a in 0.2..1.3f64, b in 0.2..1.3f64) {
        let p1 = E;
        let p2 = normalize(E * a.cos() + I * a.sin());
        let p3 = normalize(E * b.cos() + J * b.sin());
        let sum = vertex_angle(&p1, &p2, &p3) + vertex_angle(&p2, &p3, &p1) + vertex_angle(&p3, &p1, &p2);
        prop_assert!((sum - PI - triangle_excess(&p1, &p2, &p3)).abs() < 1e-10);
    }
}
