use s3forge::assembly::great_sphere_mesh;
use s3forge::closing::{evaluate_point, ClosingConfig, SweepPoint};
use s3forge::s3core::*;
use s3forge_cli::config::MeshFormat;
use s3forge_cli::export::*;

fn sphere() -> Projected {
    let m = great_sphere_mesh(&normalize(J + E * 0.2), 2);
    project(&m.vertices, &m.triangles, true).unwrap()
}

#[test]
fn obj_round_trip_is_bit_exact() {
    let p = sphere();
    let mut buf = Vec::new();
    write_obj(&mut buf, &p).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# stereographic projection, pole=-k\n"));
    let back = parse_obj(&text).unwrap();
    assert_eq!(back.points, p.points);
    assert_eq!(back.faces, p.triangles);
}

#[test]
fn ply_lists_counts_and_values() {
    let p = sphere();
    let mut buf = Vec::new();
    write_ply(&mut buf, &p).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let (header, body) = text.split_once("end_header\n").unwrap();
    assert!(header.contains(&format!("element vertex {}\n", p.points.len())));
    assert!(header.contains(&format!("element face {}\n", p.triangles.len())));
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), p.points.len() + p.triangles.len());
    for (line, q) in lines.iter().zip(&p.points) {
        let xs: Vec<f64> = line.split(' ').map(|s| s.parse().unwrap()).collect();
        assert_eq!(xs, q.to_vec());
    }
    let last: Vec<usize> = lines.last().unwrap().split(' ').map(|s| s.parse().unwrap()).collect();
    let t = p.triangles.last().unwrap();
    assert_eq!(last, vec![3, t[0], t[1], t[2]]);
}

#[test]
fn pole_vertices_are_rotated_or_refused() {
    let v = vec![-K, E, I, J];
    let t = vec![[0, 1, 2], [0, 2, 3]];
    assert!(matches!(
        project(&v, &t, false),
        Err(ExportError::PoleSingularity { vertex: 0 })
    ));
    let p = project(&v, &t, true).unwrap();
    let angle = p.rotation.unwrap();
    assert!((angle - std::f64::consts::PI / 7.0).abs() < 1e-15);
    let mut buf = Vec::new();
    write_obj(&mut buf, &p).unwrap();
    let back = parse_obj(&String::from_utf8(buf).unwrap()).unwrap();
    assert!(back.comments.iter().any(|c| c.contains("pre-rotation")));
    assert!(matches!(project(&v, &[], true), Err(ExportError::EmptyMesh)));
}

#[test]
fn export_mesh_writes_both_formats() {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let m = great_sphere_mesh(&K, 1);
    for (format, name) in [(MeshFormat::Obj, "sphere.obj"), (MeshFormat::Ply, "sphere.ply")] {
        let path = dir.join(name);
        let p = export_mesh(&m.vertices, &m.triangles, format, &path, true).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.starts_with("ply\n"), format == MeshFormat::Ply);
        assert_eq!(p.points.len(), m.vertices.len());
    }
}

#[test]
fn csv_keeps_order_and_writes_nan() {
    let cfg = ClosingConfig::default();
    let rows: Vec<_> = [3.5, 3.2]
        .into_iter()
        .map(|l| evaluate_point(SweepPoint::LOmega { l, omega: 0.1 }, &cfg))
        .collect();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER.join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let second: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(lines.next().is_none());
    assert_eq!(first.len(), SWEEP_HEADER.len());
    assert_eq!(first[0].parse::<f64>().unwrap(), 3.5);
    assert_eq!(second[0].parse::<f64>().unwrap(), 3.2);
    assert_eq!(first[4], "NaN");
    assert_eq!(first[5], "NaN");

    let mut empty = Vec::new();
    write_csv(&[], &mut empty).unwrap();
    assert_eq!(
        String::from_utf8(empty).unwrap(),
        format!("{}\n", SWEEP_HEADER.join(","))
    );
}

#[test]
fn fmt17_round_trips() {
    for x in [1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
        assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }
}
