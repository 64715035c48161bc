use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use s3forge::conjugate::*;
use s3forge::pentagon::*;
use s3forge::plateau::*;
use s3forge::s3core::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::sync::OnceLock;

struct Solved {
    l: f64,
    omega: f64,
    pent: Pentagon,
    disk: MinimalDisk,
    contour: ConjugateContour,
}

fn solved(l: f64, omega: f64) -> Solved {
    let pent = pentagon_lw(l, omega).unwrap();
    let cfg = SolveConfig {
        n: 24,
        levels: 1,
        ..Default::default()
    };
    let disk = solve(&pent, &cfg).unwrap();
    let contour = reconstruct_contour(&disk, &pent, &ConjugateConfig::default()).unwrap();
    Solved {
        l,
        omega,
        pent,
        disk,
        contour,
    }
}

fn samples() -> &'static [Solved] {
    static S: OnceLock<Vec<Solved>> = OnceLock::new();
    S.get_or_init(|| vec![solved(1.2, 0.88), solved(1.4, 0.5), solved(1.0, 1.1)])
}

/// Lifts gnomonic chart coordinates around k in S₂ to S³.
fn lift(x: f64, y: f64) -> Vec4 {
    normalize(K + E * x + J * y)
}

/// Counter-clockwise convex hull of planar points.
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[test]
fn zero_curvature_gives_a_great_circle() {
    let s2 = mirror_sphere();
    let len = 1.3;
    let arc = integrate_frenet(|_| 0.0, len, &s2, &K, &E, &-J).unwrap();
    let end = arc.last().unwrap().point;
    assert!((end - (K * len.cos() + E * len.sin())).norm() < 1e-10);
}

#[test]
fn constant_curvature_gives_a_circle() {
    let s2 = mirror_sphere();
    let arc = integrate_frenet(|_| 1.0, PI, &s2, &K, &E, &-J).unwrap();
    let radius = (1.0f64).atan2(1.0);
    let centre = normalize(K * radius.cos() - J * radius.sin());
    for s in &arc {
        assert!((dist(&s.point, &centre) - FRAC_PI_4).abs() < 1e-9);
        let f = [s.point, s.tangent, s.normal];
        for a in 0..3 {
            assert!(f[a].dot(&I).abs() < 1e-12);
            for b in 0..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((f[a].dot(&f[b]) - target).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn frenet_rejects_a_bad_frame() {
    let s2 = mirror_sphere();
    assert!(matches!(
        integrate_frenet(|_| 0.0, 1.0, &s2, &K, &I, &-J),
        Err(ConjugateError::InvalidFrame(_))
    ));
}

#[test]
fn theta_of_examples() {
    let z = K * 0.3f64.cos() + J * 0.3f64.sin();
    let (theta, a) = theta_of(&z).unwrap();
    assert!(theta.abs() < 1e-15);
    assert!((a - 0.3).abs() < 1e-14);
    assert!(matches!(theta_of(&J), Err(ConjugateError::OutOfQuarter(_))));
}

#[test]
fn curvature_integrals_match_normal_rotation() {
    let (l, w) = (FRAC_PI_3, FRAC_PI_4);
    let pent = pentagon_lw(l, w).unwrap();
    let disk = solve(&pent, &SolveConfig::default()).unwrap();
    let cfg = ConjugateConfig::default();
    let kd = kappa_from_rho(&rho_profile(disk.mesh(), &pent, EdgeTag::DeltaPlus).unwrap(), &cfg).unwrap();
    assert!((kd.integral() - (PI - w)).abs() < 1e-2);
    assert!(kd.positive);
    let kb = kappa_from_rho(&rho_profile(disk.mesh(), &pent, EdgeTag::BetaPlus).unwrap(), &cfg).unwrap();
    assert!((kb.integral() - theta_beta_closedform(l, w)).abs() < 1e-2);
}

#[test]
fn flat_disk_has_a_geodesic_conjugate() {
    let w = 0.0;
    let pent = pentagon_lw(1.0, w).unwrap();
    let disk = solve(
        &pent,
        &SolveConfig {
            n: 16,
            levels: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let kd = kappa_from_rho(
        &rho_profile(disk.mesh(), &pent, EdgeTag::DeltaPlus).unwrap(),
        &ConjugateConfig::default(),
    )
    .unwrap();
    assert!(kd.values.iter().all(|k| k.abs() < 1e-6));
    let arc = integrate_frenet(|s| kd.at(s), 1.0, &mirror_sphere(), &K, &E, &-J).unwrap();
    let pts: Vec<Vec4> = arc.iter().map(|s| s.point).collect();
    assert!(region_area(&pts, &mirror_sphere()).unwrap().abs() < 1e-6);
}

#[test]
fn contours_have_source_lengths() {
    for s in samples() {
        let c = &s.contour;
        assert!((c.delta_star.length() - s.l).abs() < 1e-3);
        assert!((c.beta_star.length() - s.pent.beta_plus.length()).abs() < 1e-3);
        assert!((c.alpha_star.length() - s_bar(s.l, s.omega)).abs() < 1e-3);
        assert!((c.delta_star.samples[0].point - K).norm() < 1e-15);
        for arc in [&c.delta_star, &c.beta_star, &c.alpha_star] {
            for p in arc.points() {
                assert!((p.norm() - 1.0).abs() < 1e-8);
                assert!(arc.sphere.side(&p).abs() < 1e-8);
            }
        }
        assert!((c.delta_star.normal_length() - (PI - s.omega)).abs() < 1e-2);
        let l_gamma = gamma_length(&s.disk).unwrap().1;
        assert!(c.closure_gap.unwrap() < 1e-2 * l_gamma.max(1.0));
    }
}

#[test]
fn delta_star_enters_the_upper_half_and_is_embedded() {
    for s in samples() {
        let c = &s.contour;
        for p in &c.delta_star.points()[1..] {
            assert!(p.dot(&J) > 0.0);
            assert!(p.dot(&K) > 0.0);
        }
        let normals: Vec<Vec4> = c.delta_star.samples.iter().map(|x| x.normal).collect();
        let report = curve_validators(&c.delta_star.points(), Some(&normals), &c.delta_star.sphere);
        assert!(report.convex_embedding(), "{report:?}");
        assert!(c.a > 0.0 && c.a < FRAC_PI_2);
        assert!(c.theta.abs() < FRAC_PI_2);
    }
}

#[test]
fn gauss_bonnet_theta_is_omega_minus_area() {
    for s in samples() {
        let c = &s.contour;
        let area = region_area(&c.delta_star.points(), &c.delta_star.sphere).unwrap();
        assert!(area > 0.0);
        assert_eq!(gauss_bonnet_theta(c, s.omega).unwrap(), s.omega - area);
    }
}

#[test]
fn sigma_pentagons_are_not_reconstructed() {
    let pent = pentagon_sigma(0.8).unwrap();
    let disk = solve(
        &pent,
        &SolveConfig {
            n: 12,
            levels: 1,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(matches!(
        reconstruct_contour(&disk, &pent, &ConjugateConfig::default()),
        Err(ConjugateError::UnsupportedPentagon)
    ));
}

#[test]
fn self_crossing_curve_is_rejected() {
    let s2 = mirror_sphere();
    let eight: Vec<Vec4> = (0..200)
        .map(|i| {
            let t = 0.3 + 2.0 * PI * (i as f64 + 0.5) / 200.0;
            lift(0.5 * t.sin(), 0.5 * t.sin() * t.cos())
        })
        .collect();
    let report = curve_validators(&eight, None, &s2);
    assert!(report.self_intersections > 0);
    assert!(!report.embedded());
    let circle: Vec<Vec4> = (0..=100)
        .map(|i| {
            let t = 1.5 * PI * i as f64 / 100.0;
            lift(0.4 * t.cos(), 0.4 * t.sin())
        })
        .collect();
    assert!(curve_validators(&circle, None, &s2).embedded());
}

#[test]
fn nested_caps_have_monotone_perimeters() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s2 = mirror_sphere();
    for _ in 0..50 {
        let r1: f64 = rng.random_range(0.05..1.4);
        let r2: f64 = rng.random_range(0.05..1.4);
        let (small, large) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let cap = |r: f64| -> Vec<Vec4> {
            (0..256)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / 256.0;
                    K * r.cos() + (E * t.cos() + J * t.sin()) * r.sin()
                })
                .collect()
        };
        let p = nested_perimeters(&cap(small), &cap(large), &s2);
        assert!(p.monotone());
        assert!((p.outer - 2.0 * PI * large.sin()).abs() < 1e-3);
    }
}

#[test]
fn nested_convex_polygons_have_monotone_perimeters() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s2 = mirror_sphere();
    for _ in 0..100 {
        let inner_pts: Vec<(f64, f64)> = (0..8)
            .map(|_| (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
            .collect();
        let mut outer_pts = inner_pts.clone();
        outer_pts.extend((0..8).map(|_| (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))));
        let inner: Vec<Vec4> = hull(inner_pts).into_iter().map(|(x, y)| lift(x, y)).collect();
        let outer: Vec<Vec4> = hull(outer_pts).into_iter().map(|(x, y)| lift(x, y)).collect();
        let p = nested_perimeters(&inner, &outer, &s2);
        assert!(p.monotone(), "{p:?}");
        let crofton = crofton_perimeter(&outer, &s2, 20000);
        assert!((crofton - p.outer).abs() < 2e-2 * p.outer);
        assert!(crofton_perimeter(&inner, &s2, 20000) <= crofton + 1e-9);
    }
}

#[test]
fn isoperimetric_margin_examples() {
    assert!(isoperimetric_margin(0.0, 0.0).abs() < 1e-15);
    assert!((isoperimetric_margin(FRAC_PI_2, FRAC_PI_2) - -0.5 * PI * PI).abs() < 1e-12);
}

proptest! {
    #[test]
    fn frenet_output_stays_orthonormal(k in -3.0..3.0f64, len in 0.1..PI) {
        let s2 = mirror_sphere();
        let arc = integrate_frenet(|s| k * (1.0 + 0.3 * s.sin()), len, &s2, &K, &E, &-J).unwrap();
        let last = arc.last().unwrap();
        prop_assert!((last.s - len).abs() < 1e-12);
        prop_assert!(last.point.dot(&last.tangent).abs() < 1e-10);
        prop_assert!(last.tangent.dot(&last.normal).abs() < 1e-10);
        prop_assert!(last.point.dot(&I).abs() < 1e-12);
    }

    #[test]
    fn region_area_of_a_fan_matches_excess(a in 0.1..1.2f64, b in 0.1..1.2f64) {
        let p = [K, lift(a, 0.0), lift(a, b)];
        let area = region_area(&p, &mirror_sphere()).unwrap();
        prop_assert!((area - triangle_excess(&p[0], &p[1], &p[2])).abs() < 1e-14);
    }
}
