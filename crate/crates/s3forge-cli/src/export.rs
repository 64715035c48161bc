//! Mesh and table writers.

use s3forge::closing::SweepRow;
use s3forge::s3core::{stereo, Vec4, K};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use thiserror::Error;

/// Distance to −k below which a vertex counts as sitting on the projection pole.
pub const POLE_EPS: f64 = 1e-6;

/// Candidate pre-rotation angles in the x3–x4 plane, tried in order.
const ROTATION_CANDIDATES: [f64; 6] = [
    std::f64::consts::PI / 7.0,
    2.0 * std::f64::consts::PI / 7.0,
    3.0 * std::f64::consts::PI / 7.0,
    4.0 * std::f64::consts::PI / 7.0,
    5.0 * std::f64::consts::PI / 7.0,
    6.0 * std::f64::consts::PI / 7.0,
];

/// Minimum distance to −k required after a pre-rotation.
const ROTATED_CLEARANCE: f64 = 1e-3;

/// Exporter errors.
#[derive(Debug, Error)]
pub enum ExportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("vertex {vertex} lies within {POLE_EPS:e} of the projection pole -k")]
    PoleSingularity { vertex: usize },
    #[error("no rotation in the x3-x4 plane clears the projection pole")]
    NoClearRotation,
    #[error("mesh has no triangles")]
    EmptyMesh,
}

pub type Result<T> = std::result::Result<T, ExportError>;

/// Stereographically projected mesh ready for writing.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    pub points: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// Angle of the x3–x4 pre-rotation, if one was applied.
    pub rotation: Option<f64>,
}

fn rotate_34(p: &Vec4, angle: f64) -> Vec4 {
    let (s, c) = angle.sin_cos();
    Vec4::new(p[0], p[1], c * p[2] - s * p[3], s * p[2] + c * p[3])
}

fn pole_distance(p: &Vec4) -> f64 {
    (p + K).norm()
}

/// Projects vertices from −k. A vertex within [`POLE_EPS`] of the pole triggers an
/// x3–x4 pre-rotation, or [`ExportError::PoleSingularity`] when `prerotate` is false.
pub fn project(vertices: &[Vec4], triangles: &[[usize; 3]], prerotate: bool) -> Result<Projected> {
    if triangles.is_empty() {
        return Err(ExportError::EmptyMesh);
    }
    let near = vertices.iter().position(|p| pole_distance(p) < POLE_EPS);
    let rotation = match near {
        None => None,
        Some(vertex) if !prerotate => return Err(ExportError::PoleSingularity { vertex }),
        Some(_) => Some(
            ROTATION_CANDIDATES
                .iter()
                .copied()
                .find(|&a| {
                    vertices
                        .iter()
                        .all(|p| pole_distance(&rotate_34(p, a)) > ROTATED_CLEARANCE)
                })
                .ok_or(ExportError::NoClearRotation)?,
        ),
    };
    let points = vertices
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = rotation.map_or(*p, |a| rotate_34(p, a));
            stereo(&q)
                .map(|y| [y[0], y[1], y[2]])
                .map_err(|_| ExportError::PoleSingularity { vertex: i })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Projected {
        points,
        triangles: triangles.to_vec(),
        rotation,
    })
}

/// Formats a double with 17 significant digits; zero (of either sign) prints as `0`.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn rotation_comment(rotation: Option<f64>) -> Option<String> {
    rotation.map(|a| {
        format!(
            "pre-rotation: angle {} in the x3-x4 plane applied before projection",
            fmt17(a)
        )
    })
}

/// Writes an OBJ document.
pub fn write_obj<W: Write>(mut w: W, mesh: &Projected) -> Result<()> {
    writeln!(w, "# stereographic projection, pole=-k")?;
    if let Some(c) = rotation_comment(mesh.rotation) {
        writeln!(w, "# {c}")?;
    }
    for p in &mesh.points {
        writeln!(w, "v {} {} {}", fmt17(p[0]), fmt17(p[1]), fmt17(p[2]))?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an ASCII PLY document.
pub fn write_ply<W: Write>(mut w: W, mesh: &Projected) -> Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "comment stereographic projection, pole=-k")?;
    if let Some(c) = rotation_comment(mesh.rotation) {
        writeln!(w, "comment {c}")?;
    }
    writeln!(w, "element vertex {}", mesh.points.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    writeln!(w, "element face {}", mesh.triangles.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for p in &mesh.points {
        writeln!(w, "{} {} {}", fmt17(p[0]), fmt17(p[1]), fmt17(p[2]))?;
    }
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    w.flush()?;
    Ok(())
}

/// Projects and writes a mesh to `path` in the requested format.
pub fn export_mesh(
    vertices: &[Vec4],
    triangles: &[[usize; 3]],
    format: crate::config::MeshFormat,
    path: &Path,
    prerotate: bool,
) -> Result<Projected> {
    let projected = project(vertices, triangles, prerotate)?;
    let w = BufWriter::new(File::create(path)?);
    match format {
        crate::config::MeshFormat::Obj => write_obj(w, &projected)?,
        crate::config::MeshFormat::Ply => write_ply(w, &projected)?,
    }
    Ok(projected)
}

/// Parsed contents of an OBJ document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjData {
    pub points: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub comments: Vec<String>,
}

/// Reads `v` and triangular `f` lines back, with zero-based face indices.
pub fn parse_obj(text: &str) -> std::result::Result<ObjData, String> {
    let mut out = ObjData::default();
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("#") | None => {
                if let Some(c) = line.strip_prefix('#') {
                    out.comments.push(c.trim().to_string());
                }
            }
            Some("v") => {
                let xs: Vec<f64> = parts
                    .map(|s| s.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1)))
                    .collect::<std::result::Result<_, _>>()?;
                if xs.len() != 3 {
                    return Err(format!("line {}: expected 3 coordinates", i + 1));
                }
                out.points.push([xs[0], xs[1], xs[2]]);
            }
            Some("f") => {
                let ix: Vec<usize> = parts
                    .map(|s| s.parse::<usize>().map_err(|e| format!("line {}: {e}", i + 1)))
                    .collect::<std::result::Result<_, _>>()?;
                if ix.len() != 3 || ix.contains(&0) {
                    return Err(format!("line {}: expected 3 one-based indices", i + 1));
                }
                out.faces.push([ix[0] - 1, ix[1] - 1, ix[2] - 1]);
            }
            Some(tag) if tag.starts_with('#') => out.comments.push(line[1..].trim().to_string()),
            Some(other) => return Err(format!("line {}: unknown record `{other}`", i + 1)),
        }
    }
    Ok(out)
}

/// Column names of the sweep table.
pub const SWEEP_HEADER: [&str; 11] = [
    "l",
    "omega",
    "tau",
    "resolution",
    "area",
    "L_gamma",
    "theta",
    "rho_delta_end",
    "hex_residual",
    "grad_norm",
    "iters",
];

fn csv_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        fmt17(x)
    }
}

/// Writes sweep rows in the given order. The header is always written.
pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wr.write_record(SWEEP_HEADER)?;
    for r in rows {
        wr.write_record([
            csv_num(r.l),
            csv_num(r.omega),
            csv_num(r.tau),
            r.resolution.to_string(),
            csv_num(r.area),
            csv_num(r.l_gamma),
            csv_num(r.theta),
            csv_num(r.rho_delta_end),
            csv_num(r.hex_residual),
            csv_num(r.grad_norm),
            r.iters.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
