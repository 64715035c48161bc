use s3forge::pentagon::*;
use s3forge::plateau::*;
use s3forge::s3core::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::sync::OnceLock;

fn flat_length(l: f64) -> f64 {
    (2f64.sqrt() * l.sin() / (1.0 + l.sin().powi(2)).sqrt()).acos()
}

fn cfg(n: usize, levels: usize) -> SolveConfig {
    SolveConfig {
        n,
        levels,
        ..Default::default()
    }
}

fn reference() -> &'static (Pentagon, MinimalDisk) {
    static DISK: OnceLock<(Pentagon, MinimalDisk)> = OnceLock::new();
    DISK.get_or_init(|| {
        let p = pentagon_lw(FRAC_PI_3, FRAC_PI_4).unwrap();
        let d = solve(&p, &cfg(24, 1)).unwrap();
        (p, d)
    })
}

fn nearest_vertex(mesh: &DiskMesh, p: &Vec4) -> usize {
    (0..mesh.vertices.len())
        .min_by(|&a, &b| (mesh.vertices[a] - p).norm().total_cmp(&(mesh.vertices[b] - p).norm()))
        .unwrap()
}

/// Regular subdivision of the octant triangle (e, i, j), projected to S³.
fn octant_mesh(n: usize) -> (Vec<Vec4>, Vec<[usize; 3]>) {
    let mut vertices = Vec::new();
    let mut index = vec![vec![0; n + 1]; n + 1];
    for a in 0..=n {
        for b in 0..=n - a {
            let c = n - a - b;
            index[a][b] = vertices.len();
            vertices.push(normalize(E * a as f64 + I * b as f64 + J * c as f64));
        }
    }
    let mut triangles = Vec::new();
    for a in 0..n {
        for b in 0..n - a {
            triangles.push([index[a][b], index[a + 1][b], index[a][b + 1]]);
            if a + b + 1 < n {
                triangles.push([index[a + 1][b], index[a + 1][b + 1], index[a][b + 1]]);
            }
        }
    }
    (vertices, triangles)
}

#[test]
fn initial_mesh_is_a_pinned_disk() {
    let p = pentagon_lw(FRAC_PI_3, FRAC_PI_4).unwrap();
    for n in [8, 12, 24] {
        let m = init_mesh(&p, n).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.boundary_vertex_count(), 6 * (n - 1));
        assert!(m.boundary_residual() < 1e-12);
        assert!(m.unit_residual() < 1e-12);
        assert!(m.symmetry_residual() < 1e-12);
        m.validate().unwrap();
    }
    assert!(init_mesh(&p, 2).is_err());
}

#[test]
fn chordal_area_of_octant_approaches_girard() {
    let (v, t) = octant_mesh(64);
    assert!((area_of(&v, &t) - FRAC_PI_2).abs() < 1e-3);
    assert_eq!(area_of(&[E, I], &[[0, 1, 0]]), 0.0);
}

#[test]
fn accepted_steps_never_increase_area() {
    let p = pentagon_lw(1.2, 0.7).unwrap();
    let c = SolveConfig {
        trace: true,
        ..cfg(12, 1)
    };
    let d = solve(&p, &c).unwrap();
    let trace = &d.traces[0];
    assert!(trace.len() > 2);
    for w in trace.windows(2) {
        assert!(w[1].1 <= w[0].1, "area rose from {} to {}", w[0].1, w[1].1);
    }
}

#[test]
fn flat_pentagons_stay_in_s3() {
    for l in [0.5, FRAC_PI_4, 1.2] {
        let p = pentagon_lw(l, 0.0).unwrap();
        let d = solve(&p, &cfg(16, 2)).unwrap();
        let off = d.mesh().vertices.iter().map(|v| v.dot(&J).abs()).fold(0.0, f64::max);
        assert!(off <= 1e-6, "l = {l}: off S3 by {off}");
        let (_, ex) = gamma_length(&d).unwrap();
        assert!((ex - flat_length(l)).abs() < 1e-4, "l = {l}: {ex}");
        let n = normal_field(d.mesh()).unwrap();
        assert!(n.iter().all(|v| (v + J).norm() < 1e-6));
        assert!(graph_min(d.mesh()).unwrap().abs() < 1e-6);
    }
    assert!((flat_length(FRAC_PI_4) - 0.61548).abs() < 1e-5);
}

#[test]
fn flat_area_converges_at_second_order() {
    let p = pentagon_lw(FRAC_PI_4, 0.0).unwrap();
    let d = solve(&p, &cfg(8, 4)).unwrap();
    let a: Vec<f64> = d.ladder.iter().map(|e| e.area).collect();
    let ratio = (a[2] - a[1]) / (a[3] - a[2]);
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    // Right angles at z±, y± and a 3π/2 corner at k give area π/2 by Gauss–Bonnet.
    assert!((d.area_extrapolated() - FRAC_PI_2).abs() < 1e-5);
    assert!((a[3] - FRAC_PI_2).abs() < 1e-3);
    for m in &d.meshes {
        assert!(m.boundary_residual() < 1e-12);
    }
}

#[test]
fn reference_disk_is_contained_and_symmetric() {
    let (p, d) = reference();
    let m = d.mesh();
    assert!(d.grad_norm() <= 1e-8);
    let (_, margin) = containment(m, &polyhedron(p).unwrap());
    assert!(margin > 0.0, "margin {margin}");
    assert!(m.symmetry_residual() < 1e-10);
    assert!(m.boundary_residual() < 1e-12);
    assert!(m.unit_residual() < 1e-12);
}

#[test]
fn reference_normals() {
    let (p, d) = reference();
    let m = d.mesh();
    let n = normal_field(m).unwrap();
    for (v, x) in n.iter().zip(&m.vertices) {
        assert!(v.dot(x).abs() < 1e-8);
        assert!((v.norm() - 1.0).abs() < 1e-8);
    }
    assert!(n[m.anchor].dot(&-J) > 0.5);
    let (_, ja, _) = face_normals(FRAC_PI_3, FRAC_PI_4);
    let y = nearest_vertex(m, &p.y_plus);
    assert!((n[y] - ja).norm() < 5e-2);
    assert!(graph_min(m).unwrap() > 0.0);
    assert!(killing_graph_value(&-J, &K).abs() < 1e-15);
}

#[test]
fn reference_rho_profiles() {
    let (p, d) = reference();
    let m = d.mesh();
    let delta = rho_profile(m, p, EdgeTag::DeltaPlus).unwrap();
    assert!(delta.value_at(0.0).abs() < 5e-3);
    assert!(delta.max_decrease() < 5e-3);
    assert!((delta.end_value() - (PI - FRAC_PI_4)).abs() < 1e-2);
    let beta = rho_profile(m, p, EdgeTag::BetaPlus).unwrap();
    assert!((beta.end_value() - theta_beta_closedform(FRAC_PI_3, FRAC_PI_4)).abs() < 1e-2);
    let alpha = rho_profile(m, p, EdgeTag::Alpha).unwrap();
    let at_x = alpha.value_at(s_bar(FRAC_PI_3, FRAC_PI_4));
    assert!(at_x > 0.0 && at_x < FRAC_PI_2, "{at_x}");
}

#[test]
fn sigma_disk_is_symmetric_and_contained() {
    let p = pentagon_sigma(FRAC_PI_4).unwrap();
    let d = solve(&p, &cfg(16, 1)).unwrap();
    assert!(d.mesh().symmetry_residual() < 1e-10);
    let u = polyhedron(&p).unwrap();
    assert!(d.mesh().vertices.iter().all(|v| u.contains(v)));
}

#[test]
fn mirror_length_examples() {
    for w in [0.3, 0.6, 0.9] {
        let p = pentagon_lw(FRAC_PI_2, w).unwrap();
        let d = solve(&p, &cfg(16, 2)).unwrap();
        assert!(gamma_length(&d).unwrap().1 > FRAC_PI_2, "omega = {w}");
    }
    let d = solve(&pentagon_sigma(0.05).unwrap(), &cfg(16, 1)).unwrap();
    assert!(gamma_length(&d).unwrap().1 < 0.15);
}

#[test]
fn disk_order_examples() {
    let on_level = |w: f64| {
        let l = level_l(0.3, w).unwrap();
        solve(&pentagon_lw(l, w).unwrap(), &cfg(16, 1)).unwrap()
    };
    let (a, b) = (on_level(0.5), on_level(0.9));
    assert_eq!(disk_order(a.mesh(), b.mesh()).unwrap(), DiskOrder::Above);
    assert_eq!(disk_order(b.mesh(), a.mesh()).unwrap(), DiskOrder::Below);
    assert_eq!(disk_order(a.mesh(), a.mesh()).unwrap(), DiskOrder::Equal);
    let s1 = solve(&pentagon_sigma(1.2).unwrap(), &cfg(16, 1)).unwrap();
    let s2 = solve(&pentagon_sigma(0.6).unwrap(), &cfg(16, 1)).unwrap();
    assert_eq!(disk_order(s1.mesh(), s2.mesh()).unwrap(), DiskOrder::Above);
}

#[test]
fn invalid_configs_are_rejected() {
    let p = pentagon_lw(1.0, 0.5).unwrap();
    assert!(matches!(solve(&p, &cfg(4, 1)), Err(PlateauError::InvalidConfig(_))));
    let bad = SolveConfig {
        momentum: 1.0,
        ..cfg(12, 1)
    };
    assert!(matches!(solve(&p, &bad), Err(PlateauError::InvalidConfig(_))));
    let tight = SolveConfig {
        max_iter: 2,
        ..cfg(12, 1)
    };
    assert!(matches!(solve(&p, &tight), Err(PlateauError::NonConvergence { .. })));
}

#[test]
fn smoothing_spline_reproduces_lines() {
    let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
    let y: Vec<f64> = t.iter().map(|x| 0.5 + 2.0 * x).collect();
    let s = SmoothingSpline::fit_gcv(&t, &y);
    for x in [0.05, 1.3, 2.85] {
        assert!((s.eval(x) - (0.5 + 2.0 * x)).abs() < 1e-8);
        assert!((s.deriv(x) - 2.0).abs() < 1e-6);
    }
}

#[test]
fn richardson_removes_quadratic_error() {
    let exact = 1.7;
    let f = |h: f64| exact + 0.3 * h * h;
    assert!((richardson(f(0.2), f(0.1)) - exact).abs() < 1e-14);
}
