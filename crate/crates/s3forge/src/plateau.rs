//! Discrete Plateau solver on S³ and measurements of the solved disk.
//!
//! A disk is a triangulated mesh with vertices on S³ whose boundary
//! vertices are pinned to exact great-circle arcs. The discrete area is the
//! sum of chordal triangle areas in R⁴. Interior vertices move by a
//! Laplacian-preconditioned projected gradient with Armijo backtracking and
//! are renormalized to S³ after each step. Reflective symmetries are
//! enforced exactly by averaging with mirror partners.

use crate::pentagon::{face_normals, polyhedron, w_pm, GeodesicArc, Pentagon, PentagonKind, Polyhedron};
use crate::s3core::{chordal_area, cross3, dist, normalize, tangent_part, Isometry, Vec4, I, J, V_MINUS};
use nalgebra::{DMatrix, DVector, Vector4};
use std::collections::HashMap;
use thiserror::Error;

/// Errors raised by the solver and its measurements.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlateauError {
    #[error("mesh construction failed: {0}")]
    MeshBuildFailure(String),
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },
    #[error("vertex {vertex} leaves the bounding polyhedron (margin {margin:e})")]
    ContainmentViolation { vertex: usize, margin: f64 },
    #[error("the mesh has no mirror chain")]
    NoMirrorChain,
    #[error("normal orientation is ambiguous (alignment {0})")]
    OrientationAmbiguity(f64),
    #[error("edge frame is degenerate: {0}")]
    FrameDegeneracy(String),
    #[error("curves are closer than the decision tolerance")]
    TangencyUndecidable,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, PlateauError>;

/// Label of a boundary arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    DeltaPlus,
    DeltaMinus,
    BetaPlus,
    BetaMinus,
    Alpha,
    /// Edge `m` of a general polygon.
    Side(usize),
}

/// Position of a pinned vertex: arc index and arc length from the arc start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    pub arc: usize,
    pub t: f64,
}

/// A reflective symmetry of the disk: a vertex involution and the matching isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetry {
    pub perm: Vec<usize>,
    pub iso: Isometry,
}

/// A triangulated disk on S³ with pinned boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskMesh {
    pub vertices: Vec<Vec4>,
    pub triangles: Vec<[usize; 3]>,
    pub arcs: Vec<(EdgeTag, GeodesicArc)>,
    /// Pins per vertex; corners carry one pin per incident arc.
    pub pins: Vec<Vec<Pin>>,
    pub symmetries: Vec<Symmetry>,
    /// Mirror chain from its start vertex (k for pentagons) to its end vertex.
    pub chain: Vec<usize>,
    /// Vertex used to fix the global normal orientation.
    pub anchor: usize,
    /// Expected unit normal at the anchor.
    pub anchor_normal: Vec4,
    /// +1 or −1: the factor turning winding normals into normals oriented like `anchor_normal`.
    ///
    /// Fixed on the unsolved layout, since the solver never changes the triangle winding.
    pub winding: f64,
    /// Nominal boundary samples per edge at this level.
    pub resolution: usize,
}

/// Reflection in S₂ as a 4-vector map.
pub fn r2(v: &Vec4) -> Vec4 {
    Vector4::new(v[0], -v[1], v[2], v[3])
}

/// Boundary side of a fan template: a piece of a mesh arc between two arc lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanSide {
    pub arc: usize,
    pub t0: f64,
    pub t1: f64,
}

/// A planar reflection of a fan template together with the isometry of S³ it represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateMirror {
    /// Unit normal of the mirror line through the template centre.
    pub axis_normal: [f64; 2],
    pub iso: Isometry,
}

/// A convex planar polygon split into triangular sectors around its centre.
///
/// Side `s` joins corner `s` to corner `s + 1` and carries a piece of a
/// boundary arc. Each sector is subdivided into a regular triangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FanTemplate {
    pub corners: Vec<[f64; 2]>,
    pub sides: Vec<FanSide>,
    pub arcs: Vec<(EdgeTag, GeodesicArc)>,
    pub mirrors: Vec<TemplateMirror>,
    /// Corners joined by the mirror chain through the centre.
    pub chain: Option<(usize, usize)>,
    pub anchor_corner: usize,
    pub anchor_normal: Vec4,
    /// Whether the surface fills the reflex side of the anchor corner.
    pub anchor_reflex: bool,
    /// Fan centre; the corner centroid when absent.
    pub centre: Option<[f64; 2]>,
    /// Gnomonic chart (origin, x axis, y axis) lifting template points to S³.
    /// When absent, interior vertices come from a harmonic fill.
    pub chart: Option<[Vec4; 3]>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum FanKey {
    Center,
    Spoke(usize, usize),
    Inner(usize, usize, usize),
}

/// Builds the fan mesh of a template with `m` segments on every side.
///
/// Interior vertices are placed by a uniform-weight harmonic fill in R⁴ and
/// projected to S³.
pub fn build_fan_mesh(tpl: &FanTemplate, m: usize, resolution: usize) -> Result<DiskMesh> {
    let ns = tpl.corners.len();
    if ns < 3 || tpl.sides.len() != ns || m < 2 {
        return Err(PlateauError::MeshBuildFailure(
            "a fan template needs at least three sides and two segments per side".into(),
        ));
    }
    let centre = tpl.centre.unwrap_or_else(|| {
        let (sx, sy) = tpl.corners.iter().fold((0.0, 0.0), |a, c| (a.0 + c[0], a.1 + c[1]));
        [sx / ns as f64, sy / ns as f64]
    });
    for s in 0..ns {
        let (a, b) = (tpl.corners[s], tpl.corners[(s + 1) % ns]);
        let cr = (a[0] - centre[0]) * (b[1] - centre[1]) - (a[1] - centre[1]) * (b[0] - centre[0]);
        if cr <= 0.0 {
            return Err(PlateauError::MeshBuildFailure(
                "template is not star-shaped around its centre".into(),
            ));
        }
    }
    let key = |s: usize, i: usize, j: usize| -> FanKey {
        if i == 0 && j == 0 {
            FanKey::Center
        } else if j == 0 {
            FanKey::Spoke(s, i)
        } else if i == 0 {
            FanKey::Spoke((s + 1) % ns, j)
        } else {
            FanKey::Inner(s, i, j)
        }
    };
    let mut ids: HashMap<FanKey, usize> = HashMap::new();
    let mut plane: Vec<[f64; 2]> = Vec::new();
    let mut pins: Vec<Vec<Pin>> = Vec::new();
    let mut triangles = Vec::with_capacity(ns * m * m);
    let mut id_of = |s: usize, i: usize, j: usize, plane: &mut Vec<[f64; 2]>, pins: &mut Vec<Vec<Pin>>| -> usize {
        let k = key(s, i, j);
        if let Some(&v) = ids.get(&k) {
            if i + j == m {
                let side = tpl.sides[s];
                let f = j as f64 / m as f64;
                let pin = Pin {
                    arc: side.arc,
                    t: side.t0 + f * (side.t1 - side.t0),
                };
                if !pins[v].iter().any(|p| p.arc == pin.arc) {
                    pins[v].push(pin);
                }
            }
            return v;
        }
        let a = tpl.corners[s];
        let b = tpl.corners[(s + 1) % ns];
        let (fi, fj) = (i as f64 / m as f64, j as f64 / m as f64);
        plane.push([
            centre[0] + fi * (a[0] - centre[0]) + fj * (b[0] - centre[0]),
            centre[1] + fi * (a[1] - centre[1]) + fj * (b[1] - centre[1]),
        ]);
        let mut pin = Vec::new();
        if i + j == m {
            let side = tpl.sides[s];
            pin.push(Pin {
                arc: side.arc,
                t: side.t0 + fj * (side.t1 - side.t0),
            });
        }
        pins.push(pin);
        let v = plane.len() - 1;
        ids.insert(k, v);
        v
    };
    for s in 0..ns {
        for i in 0..m {
            for j in 0..(m - i) {
                let a = id_of(s, i, j, &mut plane, &mut pins);
                let b = id_of(s, i + 1, j, &mut plane, &mut pins);
                let c = id_of(s, i, j + 1, &mut plane, &mut pins);
                triangles.push([a, b, c]);
                if i + j + 1 < m {
                    let d = id_of(s, i + 1, j + 1, &mut plane, &mut pins);
                    triangles.push([b, d, c]);
                }
            }
        }
    }
    // Corners also lie on the previous side.
    for s in 0..ns {
        let v = id_of(s, m, 0, &mut plane, &mut pins);
        let prev = tpl.sides[(s + ns - 1) % ns];
        let pin = Pin {
            arc: prev.arc,
            t: prev.t1,
        };
        if !pins[v].iter().any(|p| p.arc == pin.arc) {
            pins[v].push(pin);
        }
    }
    let nv = plane.len();
    let mut vertices = vec![Vec4::zeros(); nv];
    for v in 0..nv {
        if let Some(p) = pins[v].first() {
            vertices[v] = tpl.arcs[p.arc].1.at(p.t);
        }
    }
    let free: Vec<bool> = pins.iter().map(|p| p.is_empty()).collect();
    if let Some([o, ex, ey]) = tpl.chart {
        for v in 0..nv {
            let q = normalize(o + ex * plane[v][0] + ey * plane[v][1]);
            match pins[v].as_mut_slice() {
                [] => vertices[v] = q,
                [pin] => {
                    // Re-pin at the arc point under the chart position so the layout stays consistent.
                    let arc = &tpl.arcs[pin.arc].1;
                    let raw = arc.circle.param_of(&q) - arc.t0;
                    let turns = ((pin.t - raw) / std::f64::consts::TAU).round();
                    pin.t = raw + turns * std::f64::consts::TAU;
                    vertices[v] = arc.at(pin.t);
                }
                _ => {}
            }
        }
    } else {
        // Seed the mirror chain on the geodesic between its ends so the fill cannot fold along it.
        let mut fixed = free.iter().map(|f| !f).collect::<Vec<bool>>();
        if let Some((a, b)) = tpl.chain {
            let (p, q) = (ids[&FanKey::Spoke(a, m)], ids[&FanKey::Spoke(b, m)]);
            let (start, end) = (vertices[p], vertices[q]);
            let theta = dist(&start, &end);
            let dir = normalize(tangent_part(&start, &end));
            let seq: Vec<usize> = (1..m)
                .rev()
                .map(|i| ids[&FanKey::Spoke(a, i)])
                .chain(std::iter::once(ids[&FanKey::Center]))
                .chain((1..m).map(|i| ids[&FanKey::Spoke(b, i)]))
                .collect();
            let total = seq.len() + 1;
            for (k, &v) in seq.iter().enumerate() {
                let t = theta * (k + 1) as f64 / total as f64;
                vertices[v] = start * t.cos() + dir * t.sin();
                fixed[v] = true;
            }
        }
        let movable: Vec<bool> = fixed.iter().map(|f| !f).collect();
        harmonic_fill(&mut vertices, &triangles, &movable)?;
    }
    let mut keys = vec![FanKey::Center; nv];
    for (k, &v) in &ids {
        keys[v] = *k;
    }
    let mut symmetries = Vec::new();
    for mirror in &tpl.mirrors {
        let [nx, ny] = mirror.axis_normal;
        let reflect = |p: [f64; 2]| {
            let d = (p[0] - centre[0]) * nx + (p[1] - centre[1]) * ny;
            [p[0] - 2.0 * d * nx, p[1] - 2.0 * d * ny]
        };
        let scale = tpl
            .corners
            .iter()
            .map(|c| (c[0] - centre[0]).hypot(c[1] - centre[1]))
            .fold(0.0, f64::max);
        let mut cmap = Vec::with_capacity(ns);
        for c in &tpl.corners {
            let q = reflect(*c);
            let hit = tpl
                .corners
                .iter()
                .position(|d| (d[0] - q[0]).hypot(d[1] - q[1]) <= 1e-9 * scale);
            match hit {
                Some(h) => cmap.push(h),
                None => {
                    return Err(PlateauError::MeshBuildFailure(
                        "template is not symmetric under its mirror".into(),
                    ))
                }
            }
        }
        if (0..ns).any(|s| (cmap[(s + 1) % ns] + 1) % ns != cmap[s]) {
            return Err(PlateauError::MeshBuildFailure(
                "mirror does not reverse the corner order".into(),
            ));
        }
        let perm: Vec<usize> = keys
            .iter()
            .map(|k| match *k {
                FanKey::Center => ids[&FanKey::Center],
                FanKey::Spoke(s, i) => ids[&FanKey::Spoke(cmap[s], i)],
                FanKey::Inner(s, i, j) => ids[&FanKey::Inner(cmap[(s + 1) % ns], j, i)],
            })
            .collect();
        symmetries.push(Symmetry { perm, iso: mirror.iso });
    }
    let chain = match tpl.chain {
        Some((a, b)) => {
            let mut c: Vec<usize> = (1..=m).rev().map(|i| ids[&FanKey::Spoke(a, i)]).collect();
            c.push(ids[&FanKey::Center]);
            c.extend((1..=m).map(|i| ids[&FanKey::Spoke(b, i)]));
            c
        }
        None => Vec::new(),
    };
    let mesh = DiskMesh {
        vertices,
        triangles,
        arcs: tpl.arcs.clone(),
        pins,
        symmetries,
        chain,
        anchor: ids[&FanKey::Spoke(tpl.anchor_corner, m)],
        anchor_normal: tpl.anchor_normal,
        winding: 1.0,
        resolution,
    };
    let mut mesh = mesh;
    mesh.winding = anchor_winding(tpl, &ids, &mesh.triangles, m)?;
    mesh.symmetrize();
    mesh.validate()?;
    Ok(mesh)
}

/// Winding sign of a fan mesh, from the triangle order at the anchor corner
/// and the ideal tangents of the two boundary arcs meeting there.
///
/// A triangle (p, next, c) with c inside the corner has winding normal along
/// cross3(p, T_out, T_prev), where T_out points along the outgoing side and
/// T_prev back along the incoming one. The sign flips on a reflex corner.
fn anchor_winding(tpl: &FanTemplate, ids: &HashMap<FanKey, usize>, triangles: &[[usize; 3]], m: usize) -> Result<f64> {
    let ns = tpl.corners.len();
    let a = tpl.anchor_corner;
    let (out, inc) = (tpl.sides[a], tpl.sides[(a + ns - 1) % ns]);
    let arc_out = tpl.arcs[out.arc].1;
    let arc_in = tpl.arcs[inc.arc].1;
    let p = arc_out.at(out.t0);
    let t_out = arc_out.tangent_at(out.t0) * (out.t1 - out.t0).signum();
    let t_prev = -arc_in.tangent_at(inc.t1) * (inc.t1 - inc.t0).signum();
    let corner = ids[&FanKey::Spoke(a, m)];
    let next = ids[&FanKey::Inner(a, m - 1, 1)];
    let tri = triangles
        .iter()
        .find(|t| t.contains(&corner) && t.contains(&next))
        .ok_or_else(|| PlateauError::MeshBuildFailure("anchor corner has no boundary triangle".into()))?;
    let pos = |v: usize| tri.iter().position(|&x| x == v).unwrap();
    let forward = if (pos(corner) + 1) % 3 == pos(next) { 1.0 } else { -1.0 };
    let align = cross3(&p, &t_out, &t_prev).dot(&tpl.anchor_normal);
    if align.abs() < 0.5 {
        return Err(PlateauError::OrientationAmbiguity(align));
    }
    let reflex = if tpl.anchor_reflex { -1.0 } else { 1.0 };
    Ok(forward * align.signum() * reflex)
}

/// Places free vertices at the uniform-weight harmonic extension of the pinned ones, projected to S³.
fn harmonic_fill(vertices: &mut [Vec4], triangles: &[[usize; 3]], free: &[bool]) -> Result<()> {
    let nv = vertices.len();
    let lap = Laplacian::build_uniform(nv, triangles, free);
    let mut rhs = vec![Vec4::zeros(); nv];
    for ((a, b), _) in edge_list(triangles) {
        if free[a] && !free[b] {
            rhs[a] += vertices[b];
        }
        if free[b] && !free[a] {
            rhs[b] += vertices[a];
        }
    }
    let fill = lap.solve(&rhs, 1e-13, 20 * nv);
    for v in 0..nv {
        if free[v] {
            let len = fill[v].norm();
            if len < 1e-8 {
                return Err(PlateauError::MeshBuildFailure(
                    "harmonic fill passes through the origin".into(),
                ));
            }
            vertices[v] = fill[v] / len;
        }
    }
    Ok(())
}

fn edge_list(triangles: &[[usize; 3]]) -> Vec<((usize, usize), usize)> {
    let mut m: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut v: Vec<_> = m.into_iter().collect();
    v.sort_unstable();
    v
}

/// Fan template of a pentagon: a regular pentagon with `x` inserted as a sixth corner.
///
/// Corners in order k, z+, y+, x, y−, z−; the mirror chain runs from k
/// through the centre to x.
pub fn pentagon_template(pent: &Pentagon) -> FanTemplate {
    let ang = |deg: f64| {
        let r = deg.to_radians();
        [r.cos(), r.sin()]
    };
    let yp = ang(234.0);
    let ym = ang(306.0);
    let corners = vec![ang(90.0), ang(162.0), yp, [0.0, yp[1]], ym, ang(18.0)];
    let (l, rb, sb) = (pent.l(), pent.r_bar(), pent.s_bar());
    let sides = vec![
        FanSide { arc: 0, t0: 0.0, t1: l },
        FanSide {
            arc: 2,
            t0: 0.0,
            t1: rb,
        },
        FanSide {
            arc: 4,
            t0: 0.0,
            t1: sb,
        },
        FanSide {
            arc: 4,
            t0: sb,
            t1: 2.0 * sb,
        },
        FanSide {
            arc: 3,
            t0: rb,
            t1: 0.0,
        },
        FanSide { arc: 1, t0: l, t1: 0.0 },
    ];
    FanTemplate {
        corners,
        sides,
        arcs: vec![
            (EdgeTag::DeltaPlus, pent.delta_plus),
            (EdgeTag::DeltaMinus, pent.delta_minus),
            (EdgeTag::BetaPlus, pent.beta_plus),
            (EdgeTag::BetaMinus, pent.beta_minus),
            (EdgeTag::Alpha, pent.alpha),
        ],
        mirrors: vec![TemplateMirror {
            axis_normal: [1.0, 0.0],
            iso: crate::s3core::reflect(&crate::s3core::GeodesicSphere::s2()),
        }],
        chain: Some((0, 3)),
        anchor_corner: 0,
        anchor_normal: -J,
        anchor_reflex: false,
        centre: None,
        chart: None,
    }
}

/// Template of a pentagon lying in S₃, laid out in the gnomonic chart centred
/// at the midpoint of [k, x].
///
/// The flat pentagon has a reflex corner at k, so the regular template would
/// fold; in the chart the region is star-shaped around the chart centre.
pub fn flat_template(pent: &Pentagon) -> FanTemplate {
    let mut tpl = pentagon_template(pent);
    let o = normalize(pent.k + pent.x);
    let ex = -I;
    let ey = normalize(tangent_part(&o, &pent.k));
    let chart = |p: &Vec4| {
        let q = p / p.dot(&o);
        [q.dot(&ex), q.dot(&ey)]
    };
    tpl.corners = vec![
        chart(&pent.k),
        chart(&pent.z_plus),
        chart(&pent.y_plus),
        chart(&pent.x),
        chart(&pent.y_minus),
        chart(&pent.z_minus),
    ];
    tpl.centre = Some([0.0, 0.0]);
    tpl.chart = Some([o, ex, ey]);
    tpl.anchor_reflex = true;
    tpl
}

/// Builds the initial mesh of a pentagon with `n` samples on each of δ± and β±.
///
/// The edge α receives 2n − 1 samples so that x is a vertex.
pub fn init_mesh(pent: &Pentagon, n: usize) -> Result<DiskMesh> {
    if n < 3 {
        return Err(PlateauError::MeshBuildFailure(format!(
            "need at least 3 samples per edge, got {n}"
        )));
    }
    let flat = matches!(pent.kind, PentagonKind::LOmega(p) if p.omega == 0.0);
    let tpl = if flat {
        flat_template(pent)
    } else {
        pentagon_template(pent)
    };
    build_fan_mesh(&tpl, n - 1, n)
}

impl DiskMesh {
    /// Undirected edges with their triangle counts, in sorted order.
    pub fn edge_counts(&self) -> Vec<((usize, usize), usize)> {
        edge_list(&self.triangles)
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_counts().len() as i64 + self.triangles.len() as i64
    }

    /// Boundary edges (edges in exactly one triangle).
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        self.edge_counts()
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// Number of boundary vertices.
    pub fn boundary_vertex_count(&self) -> usize {
        self.pins.iter().filter(|p| !p.is_empty()).count()
    }

    /// Whether vertex `v` is pinned.
    pub fn is_pinned(&self, v: usize) -> bool {
        !self.pins[v].is_empty()
    }

    /// Largest deviation of a pinned vertex from its arc position.
    pub fn boundary_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for (v, ps) in self.pins.iter().enumerate() {
            for p in ps {
                r = r.max((self.vertices[v] - self.arcs[p.arc].1.at(p.t)).norm());
            }
        }
        r
    }

    /// Largest |‖v‖ − 1|.
    pub fn unit_residual(&self) -> f64 {
        self.vertices.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest distance between a vertex image and its mirror partner over all symmetries.
    pub fn symmetry_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for s in &self.symmetries {
            for (v, &w) in s.perm.iter().enumerate() {
                r = r.max((s.iso.apply(&self.vertices[v]) - self.vertices[w]).norm());
            }
        }
        r
    }

    /// Checks topology and boundary structure.
    pub fn validate(&self) -> Result<()> {
        if self.euler_characteristic() != 1 {
            return Err(PlateauError::MeshBuildFailure(format!(
                "Euler characteristic {} instead of 1",
                self.euler_characteristic()
            )));
        }
        let be = self.boundary_edges();
        for &(a, b) in &be {
            if !self.is_pinned(a) || !self.is_pinned(b) {
                return Err(PlateauError::MeshBuildFailure(
                    "boundary edge with an unpinned endpoint".into(),
                ));
            }
        }
        let nb = self.boundary_vertex_count();
        if be.len() != nb {
            return Err(PlateauError::MeshBuildFailure(format!(
                "{} boundary edges for {} boundary vertices",
                be.len(),
                nb
            )));
        }
        for t in &self.triangles {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(PlateauError::MeshBuildFailure("degenerate triangle".into()));
            }
        }
        Ok(())
    }

    /// Mean length of boundary edges.
    pub fn mesh_size(&self) -> f64 {
        let be = self.boundary_edges();
        be.iter()
            .map(|&(a, b)| dist(&self.vertices[a], &self.vertices[b]))
            .sum::<f64>()
            / be.len() as f64
    }

    /// Vertex adjacency lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertices.len()];
        for ((a, b), _) in self.edge_counts() {
            nb[a].push(b);
            nb[b].push(a);
        }
        nb
    }

    /// 1→4 midpoint subdivision with midpoints projected to S³ and boundary midpoints re-pinned.
    pub fn subdivide(&self) -> DiskMesh {
        let edges = self.edge_counts();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
        let mut vertices = self.vertices.clone();
        let mut pins = self.pins.clone();
        for &((a, b), count) in &edges {
            let id = vertices.len();
            mid.insert((a, b), id);
            let mut pin = Vec::new();
            if count == 1 {
                for pa in &self.pins[a] {
                    for pb in &self.pins[b] {
                        if pa.arc == pb.arc {
                            pin.push(Pin {
                                arc: pa.arc,
                                t: 0.5 * (pa.t + pb.t),
                            });
                        }
                    }
                }
            }
            let pos = match pin.first() {
                Some(p) => self.arcs[p.arc].1.at(p.t),
                None => normalize(self.vertices[a] + self.vertices[b]),
            };
            vertices.push(pos);
            pins.push(pin);
        }
        let m = |a: usize, b: usize| mid[&(a.min(b), a.max(b))];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let (a, b, c) = (t[0], t[1], t[2]);
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let symmetries = self
            .symmetries
            .iter()
            .map(|s| {
                let mut perm = s.perm.clone();
                perm.resize(vertices.len(), 0);
                for &((a, b), _) in &edges {
                    perm[m(a, b)] = m(s.perm[a], s.perm[b]);
                }
                Symmetry { perm, iso: s.iso }
            })
            .collect();
        let mut chain = Vec::with_capacity(2 * self.chain.len());
        for w in self.chain.windows(2) {
            chain.push(w[0]);
            chain.push(m(w[0], w[1]));
        }
        if let Some(&last) = self.chain.last() {
            chain.push(last);
        }
        DiskMesh {
            vertices,
            triangles,
            arcs: self.arcs.clone(),
            pins,
            symmetries,
            chain,
            anchor: self.anchor,
            anchor_normal: self.anchor_normal,
            winding: self.winding,
            resolution: 2 * self.resolution - 1,
        }
    }

    /// Averages every vertex with the mirror images of its partners and renormalizes.
    pub fn symmetrize(&mut self) {
        for s in &self.symmetries {
            let old = self.vertices.clone();
            for (v, &w) in s.perm.iter().enumerate() {
                if !self.pins[v].is_empty() {
                    continue;
                }
                self.vertices[v] = normalize(old[v] + s.iso.apply(&old[w]));
            }
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Boundary samples per edge at the coarsest level.
    pub n: usize,
    pub max_iter: usize,
    /// Tolerance on the mean per-vertex projected gradient norm.
    pub g_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Maximum number of step halvings per line search.
    pub max_halvings: usize,
    /// Heavy-ball momentum coefficient; zero disables it.
    pub momentum: f64,
    pub symmetry: bool,
    /// Number of meshes in the refinement ladder, including the coarsest.
    pub levels: usize,
    /// Whether a polyhedron violation is reported as an error.
    pub enforce_containment: bool,
    /// Whether to record an (iteration, area, grad_norm) trace.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            n: 24,
            max_iter: 4000,
            g_tol: 1e-8,
            armijo_c: 1e-4,
            max_halvings: 60,
            momentum: 0.5,
            symmetry: true,
            levels: 2,
            enforce_containment: false,
            trace: false,
        }
    }
}

impl SolveConfig {
    /// Range checks.
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(PlateauError::InvalidConfig(format!("n = {} < 8", self.n)));
        }
        if self.g_tol.is_nan()
            || self.g_tol <= 0.0
            || self.armijo_c.is_nan()
            || self.armijo_c <= 0.0
            || self.armijo_c >= 1.0
        {
            return Err(PlateauError::InvalidConfig("tolerances must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(PlateauError::InvalidConfig("momentum must lie in [0, 1)".into()));
        }
        if self.levels == 0 || self.max_iter == 0 {
            return Err(PlateauError::InvalidConfig(
                "levels and max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Discrete chordal area.
pub fn area(mesh: &DiskMesh) -> f64 {
    area_of(&mesh.vertices, &mesh.triangles)
}

/// Chordal area of a triangle list over a vertex array.
pub fn area_of(vertices: &[Vec4], triangles: &[[usize; 3]]) -> f64 {
    triangles
        .iter()
        .map(|t| chordal_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]))
        .sum()
}

/// Euclidean area gradient in R⁴.
pub fn area_gradient(vertices: &[Vec4], triangles: &[[usize; 3]]) -> Vec<Vec4> {
    let mut g = vec![Vec4::zeros(); vertices.len()];
    for t in triangles {
        let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        let u = b - a;
        let v = c - a;
        let uu = u.norm_squared();
        let vv = v.norm_squared();
        let uv = u.dot(&v);
        let a2 = (uu * vv - uv * uv).max(0.0).sqrt();
        if a2 <= 1e-300 {
            continue;
        }
        let gb = (u * vv - v * uv) / (2.0 * a2);
        let gc = (v * uu - u * uv) / (2.0 * a2);
        g[t[1]] += gb;
        g[t[2]] += gc;
        g[t[0]] -= gb + gc;
    }
    g
}

/// Sparse symmetric matrix in compressed rows, restricted to free vertices.
struct Laplacian {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Laplacian {
    /// Cotangent Laplacian with weights clamped below at `min_w` and Dirichlet rows for pinned vertices.
    fn build(vertices: &[Vec4], triangles: &[[usize; 3]], free: &[bool], min_w: f64) -> Self {
        let nv = vertices.len();
        let mut w: HashMap<(usize, usize), f64> = HashMap::with_capacity(3 * triangles.len());
        for t in triangles {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                let c = t[(k + 2) % 3];
                let u = vertices[b] - vertices[a];
                let v = vertices[c] - vertices[a];
                let cr = (u.norm_squared() * v.norm_squared() - u.dot(&v).powi(2))
                    .max(1e-300)
                    .sqrt();
                let cot = u.dot(&v) / cr;
                *w.entry((b.min(c), b.max(c))).or_insert(0.0) += 0.5 * cot;
            }
        }
        let mut diag = vec![0.0; nv];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
        let mut keys: Vec<_> = w.into_iter().collect();
        keys.sort_unstable_by_key(|x| x.0);
        for ((a, b), wv) in keys {
            let wv = wv.max(min_w);
            diag[a] += wv;
            diag[b] += wv;
            if free[a] && free[b] {
                rows[a].push((b, wv));
                rows[b].push((a, wv));
            }
        }
        Self::from_rows(rows, diag, free)
    }

    /// Graph Laplacian with unit weights and Dirichlet rows for pinned vertices.
    fn build_uniform(nv: usize, triangles: &[[usize; 3]], free: &[bool]) -> Self {
        let mut diag = vec![0.0; nv];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
        for ((a, b), _) in edge_list(triangles) {
            diag[a] += 1.0;
            diag[b] += 1.0;
            if free[a] && free[b] {
                rows[a].push((b, 1.0));
                rows[b].push((a, 1.0));
            }
        }
        Self::from_rows(rows, diag, free)
    }

    fn from_rows(mut rows: Vec<Vec<(usize, f64)>>, mut diag: Vec<f64>, free: &[bool]) -> Self {
        let nv = diag.len();
        let mut row_start = Vec::with_capacity(nv + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable_by_key(|x| x.0);
            for &(c, v) in r.iter() {
                cols.push(c);
                vals.push(v);
            }
            row_start.push(cols.len());
        }
        for (i, d) in diag.iter_mut().enumerate() {
            if !free[i] {
                *d = 1.0;
            }
        }
        Self {
            row_start,
            cols,
            vals,
            diag,
        }
    }

    fn apply(&self, x: &[Vec4], y: &mut [Vec4]) {
        for i in 0..x.len() {
            let mut s = x[i] * self.diag[i];
            for k in self.row_start[i]..self.row_start[i + 1] {
                s -= x[self.cols[k]] * self.vals[k];
            }
            y[i] = s;
        }
    }

    /// Jacobi-preconditioned conjugate gradients on the block system.
    fn solve(&self, b: &[Vec4], rel_tol: f64, max_iter: usize) -> Vec<Vec4> {
        let n = b.len();
        let dot = |x: &[Vec4], y: &[Vec4]| x.iter().zip(y).map(|(a, b)| a.dot(b)).sum::<f64>();
        let mut x = vec![Vec4::zeros(); n];
        let mut r = b.to_vec();
        let mut z: Vec<Vec4> = r.iter().zip(&self.diag).map(|(r, d)| r / *d).collect();
        let mut p = z.clone();
        let mut ap = vec![Vec4::zeros(); n];
        let mut rz = dot(&r, &z);
        let b0 = dot(b, b).sqrt();
        if b0 == 0.0 {
            return x;
        }
        for _ in 0..max_iter {
            self.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += p[i] * alpha;
                r[i] -= ap[i] * alpha;
            }
            if dot(&r, &r).sqrt() <= rel_tol * b0 {
                break;
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + p[i] * beta;
            }
        }
        x
    }
}

const RELAX_EVERY: usize = 10;
const RELAX_SWEEPS: usize = 3;
const RELAX_FACTOR: f64 = 100.0;

/// Outcome of a single-level solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub area: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<(usize, f64, f64)>,
}

/// Projected, symmetrized area gradient and its mean per-free-vertex norm.
///
/// Only the component along the vertex normal is kept: tangential motion
/// merely reparameterizes the surface and is left frozen.
fn projected_gradient(mesh: &DiskMesh, free: &[bool], symmetric: bool) -> (Vec<Vec4>, Vec<Vec4>, f64) {
    let normals = unoriented_normals(mesh);
    let mut g = area_gradient(&mesh.vertices, &mesh.triangles);
    for (i, gi) in g.iter_mut().enumerate() {
        *gi = if free[i] {
            normals[i] * normals[i].dot(gi)
        } else {
            Vec4::zeros()
        };
    }
    if symmetric {
        for s in &mesh.symmetries {
            let old = g.clone();
            for (v, &w) in s.perm.iter().enumerate() {
                g[v] = 0.5 * (old[v] + s.iso.apply(&old[w]));
            }
        }
    }
    let nfree = free.iter().filter(|f| **f).count().max(1);
    let mean = g.iter().map(|v| v.norm()).sum::<f64>() / nfree as f64;
    (g, normals, mean)
}

/// Unit vertex normals in T_pS³ from summed triangle normals, following the triangle orientation.
pub fn unoriented_normals(mesh: &DiskMesh) -> Vec<Vec4> {
    let mut n = vec![Vec4::zeros(); mesh.vertices.len()];
    for t in &mesh.triangles {
        let (a, b, c) = (mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        let (u, v) = (b - a, c - a);
        for &i in t {
            n[i] += cross3(&mesh.vertices[i], &u, &v);
        }
    }
    for (i, ni) in n.iter_mut().enumerate() {
        let t = tangent_part(&mesh.vertices[i], ni);
        let len = t.norm();
        *ni = if len > 0.0 { t / len } else { Vec4::zeros() };
    }
    n
}

/// Moves free vertices tangentially toward the average of their neighbours.
///
/// Tangential motion changes the surface only at second order; it keeps the
/// layout from pinching while the normal flow deforms the surface.
pub fn relax_tangential(mesh: &mut DiskMesh, sweeps: usize) {
    let mut nbrs = mesh.neighbors();
    // Chain vertices slide along the chain only.
    for w in mesh.chain.windows(3) {
        nbrs[w[1]] = vec![w[0], w[2]];
    }
    for _ in 0..sweeps {
        let normals = unoriented_normals(mesh);
        let next: Vec<Vec4> = (0..mesh.vertices.len())
            .map(|i| {
                let p = mesh.vertices[i];
                if mesh.is_pinned(i) || nbrs[i].is_empty() {
                    return p;
                }
                let avg = nbrs[i].iter().map(|&j| mesh.vertices[j]).sum::<Vec4>() / nbrs[i].len() as f64;
                let mut d = tangent_part(&p, &(avg - p));
                d -= normals[i] * normals[i].dot(&d);
                normalize(p + 0.5 * d)
            })
            .collect();
        mesh.vertices = next;
        mesh.symmetrize();
    }
}

/// Minimizes the discrete area of `mesh` in place at its current resolution.
pub fn solve_level(mesh: &mut DiskMesh, cfg: &SolveConfig) -> LevelStats {
    let free: Vec<bool> = mesh.pins.iter().map(|p| p.is_empty()).collect();
    let symmetric = cfg.symmetry && !mesh.symmetries.is_empty();
    if symmetric {
        mesh.symmetrize();
    }
    let mut a = area(mesh);
    let mut trace = Vec::new();
    let mut prev_dir: Option<Vec<Vec4>> = None;
    let mut iterations = 0;
    let (mut g, mut normals, mut gn) = projected_gradient(mesh, &free, symmetric);
    let mut stalled = 0;
    while gn > cfg.g_tol && iterations < cfg.max_iter {
        if iterations > 0 && iterations % RELAX_EVERY == 0 && gn > RELAX_FACTOR * cfg.g_tol {
            relax_tangential(mesh, RELAX_SWEEPS);
            a = area(mesh);
            let r = projected_gradient(mesh, &free, symmetric);
            g = r.0;
            normals = r.1;
            gn = r.2;
        }
        let lap = Laplacian::build(&mesh.vertices, &mesh.triangles, &free, 1e-2);
        let mut d = lap.solve(&g, 1e-6, 400);
        for (i, di) in d.iter_mut().enumerate() {
            *di = if free[i] {
                normals[i] * normals[i].dot(di)
            } else {
                Vec4::zeros()
            };
        }
        if cfg.momentum > 0.0 {
            if let Some(pd) = &prev_dir {
                for i in 0..d.len() {
                    if free[i] {
                        d[i] += normals[i] * normals[i].dot(&pd[i]) * cfg.momentum;
                    }
                }
            }
        }
        let mut slope: f64 = g.iter().zip(&d).map(|(a, b)| a.dot(b)).sum();
        if slope <= 0.0 {
            d = g.clone();
            slope = g.iter().map(|v| v.norm_squared()).sum();
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..cfg.max_halvings {
            let trial: Vec<Vec4> = mesh
                .vertices
                .iter()
                .zip(&d)
                .zip(&free)
                .map(|((x, di), f)| if *f { normalize(x - di * t) } else { *x })
                .collect();
            let at = area_of(&trial, &mesh.triangles);
            if at <= a - cfg.armijo_c * t * slope {
                accepted = Some((trial, at));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, at)) => {
                debug_assert!(at <= a);
                mesh.vertices = trial;
                if symmetric {
                    mesh.symmetrize();
                }
                a = area(mesh);
                if cfg.momentum > 0.0 {
                    prev_dir = Some(d.iter().map(|v| v * t).collect());
                }
                stalled = 0;
            }
            None => {
                stalled += 1;
                prev_dir = None;
                if stalled >= 2 {
                    break;
                }
            }
        }
        let r = projected_gradient(mesh, &free, symmetric);
        g = r.0;
        normals = r.1;
        gn = r.2;
        if cfg.trace {
            trace.push((iterations, a, gn));
        }
    }
    LevelStats {
        area: a,
        grad_norm: gn,
        iterations,
        converged: gn <= cfg.g_tol,
        trace,
    }
}

/// One rung of the refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderEntry {
    pub resolution: usize,
    pub h: f64,
    pub area: f64,
    pub gamma_length: Option<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// A converged disk with its refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalDisk {
    pub kind: Option<PentagonKind>,
    /// Meshes from coarsest to finest.
    pub meshes: Vec<DiskMesh>,
    pub ladder: Vec<LadderEntry>,
    pub traces: Vec<Vec<(usize, f64, f64)>>,
    pub containment_margin: Option<f64>,
}

/// Richardson extrapolation for an O(h²) quantity under mesh halving.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

impl MinimalDisk {
    /// Finest mesh.
    pub fn mesh(&self) -> &DiskMesh {
        self.meshes.last().expect("nonempty ladder")
    }

    /// Area of the finest mesh.
    pub fn area(&self) -> f64 {
        self.ladder.last().map(|e| e.area).unwrap_or(f64::NAN)
    }

    /// Gradient norm of the finest mesh.
    pub fn grad_norm(&self) -> f64 {
        self.ladder.last().map(|e| e.grad_norm).unwrap_or(f64::NAN)
    }

    /// Total iterations over all levels.
    pub fn iterations(&self) -> usize {
        self.ladder.iter().map(|e| e.iterations).sum()
    }

    /// Extrapolates a per-mesh measurement from the last two levels.
    pub fn extrapolate<F: Fn(&DiskMesh) -> f64>(&self, f: F) -> f64 {
        let n = self.meshes.len();
        if n >= 2 {
            richardson(f(&self.meshes[n - 2]), f(&self.meshes[n - 1]))
        } else {
            f(&self.meshes[n - 1])
        }
    }

    /// Extrapolates a ladder of already computed values.
    pub fn extrapolate_values(values: &[f64]) -> f64 {
        match values.len() {
            0 => f64::NAN,
            1 => values[0],
            n => richardson(values[n - 2], values[n - 1]),
        }
    }

    /// Extrapolated area.
    pub fn area_extrapolated(&self) -> f64 {
        Self::extrapolate_values(&self.ladder.iter().map(|e| e.area).collect::<Vec<_>>())
    }

    /// Extrapolated mirror-chain length.
    pub fn gamma_extrapolated(&self) -> Result<f64> {
        let v: Option<Vec<f64>> = self.ladder.iter().map(|e| e.gamma_length).collect();
        v.map(|v| Self::extrapolate_values(&v))
            .ok_or(PlateauError::NoMirrorChain)
    }
}

/// Solves a prepared mesh through `cfg.levels` refinement levels.
pub fn solve_mesh(mesh: DiskMesh, cfg: &SolveConfig, kind: Option<PentagonKind>) -> Result<MinimalDisk> {
    cfg.validate()?;
    let mut meshes = Vec::with_capacity(cfg.levels);
    let mut ladder = Vec::with_capacity(cfg.levels);
    let mut traces = Vec::new();
    let mut current = mesh;
    for level in 0..cfg.levels {
        if level > 0 {
            current = current.subdivide();
        }
        let stats = solve_level(&mut current, cfg);
        if !stats.converged {
            return Err(PlateauError::NonConvergence {
                iterations: stats.iterations,
                grad_norm: stats.grad_norm,
            });
        }
        ladder.push(LadderEntry {
            resolution: current.resolution,
            h: current.mesh_size(),
            area: stats.area,
            gamma_length: gamma_length_mesh(&current).ok(),
            grad_norm: stats.grad_norm,
            iterations: stats.iterations,
        });
        traces.push(stats.trace);
        meshes.push(current.clone());
    }
    Ok(MinimalDisk {
        kind,
        meshes,
        ladder,
        traces,
        containment_margin: None,
    })
}

/// Builds, solves and refines the disk spanning a pentagon.
pub fn solve(pent: &Pentagon, cfg: &SolveConfig) -> Result<MinimalDisk> {
    cfg.validate()?;
    let mesh = init_mesh(pent, cfg.n)?;
    let mut disk = solve_mesh(mesh, cfg, Some(pent.kind))?;
    if let Ok(poly) = polyhedron(pent) {
        let (v, m) = containment(disk.mesh(), &poly);
        disk.containment_margin = Some(m);
        if cfg.enforce_containment && m < -crate::pentagon::MEMBERSHIP_TOL {
            return Err(PlateauError::ContainmentViolation { vertex: v, margin: m });
        }
    }
    Ok(disk)
}

/// Re-solves the disk after one more subdivision, appending to its ladder.
pub fn refine(disk: &MinimalDisk, cfg: &SolveConfig) -> Result<MinimalDisk> {
    let mut next = disk.mesh().subdivide();
    let stats = solve_level(&mut next, cfg);
    if !stats.converged {
        return Err(PlateauError::NonConvergence {
            iterations: stats.iterations,
            grad_norm: stats.grad_norm,
        });
    }
    let mut out = disk.clone();
    out.ladder.push(LadderEntry {
        resolution: next.resolution,
        h: next.mesh_size(),
        area: stats.area,
        gamma_length: gamma_length_mesh(&next).ok(),
        grad_norm: stats.grad_norm,
        iterations: stats.iterations,
    });
    out.traces.push(stats.trace);
    out.meshes.push(next);
    Ok(out)
}

/// Smallest polyhedron margin over interior vertices and the vertex attaining it.
pub fn containment(mesh: &DiskMesh, poly: &Polyhedron) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, v) in mesh.vertices.iter().enumerate() {
        if mesh.is_pinned(i) {
            continue;
        }
        let m = poly.margin(v);
        if m < best.1 {
            best = (i, m);
        }
    }
    best
}

/// Polyline length of the mirror chain of a single mesh.
pub fn gamma_length_mesh(mesh: &DiskMesh) -> Result<f64> {
    if mesh.chain.len() < 2 {
        return Err(PlateauError::NoMirrorChain);
    }
    Ok(mesh
        .chain
        .windows(2)
        .map(|w| dist(&mesh.vertices[w[0]], &mesh.vertices[w[1]]))
        .sum())
}

/// Mirror-chain length per level and its extrapolation.
pub fn gamma_length(disk: &MinimalDisk) -> Result<(Vec<f64>, f64)> {
    let per: Result<Vec<f64>> = disk.meshes.iter().map(gamma_length_mesh).collect();
    let per = per?;
    let ex = MinimalDisk::extrapolate_values(&per);
    Ok((per, ex))
}

/// Unit normals at all vertices, oriented by the mesh's winding sign.
pub fn normal_field(mesh: &DiskMesh) -> Result<Vec<Vec4>> {
    if mesh.winding.abs() != 1.0 {
        return Err(PlateauError::OrientationAmbiguity(mesh.winding));
    }
    Ok(unoriented_normals(mesh).into_iter().map(|n| n * mesh.winding).collect())
}

/// Sampled rotation angle of the normal along a boundary edge.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoProfile {
    pub edge: EdgeTag,
    pub length: f64,
    /// (arc length, ρ) pairs sorted by arc length.
    pub samples: Vec<(f64, f64)>,
}

impl RhoProfile {
    /// Smoothing spline of the samples with GCV-selected smoothing.
    pub fn spline(&self) -> SmoothingSpline {
        let (t, r): (Vec<f64>, Vec<f64>) = self.samples.iter().cloned().unzip();
        SmoothingSpline::fit_gcv(&t, &r)
    }

    /// Smoothed value at arc length `s`.
    pub fn value_at(&self, s: f64) -> f64 {
        self.spline().eval(s)
    }

    /// Smoothed value at the end of the edge.
    pub fn end_value(&self) -> f64 {
        self.value_at(self.length)
    }

    /// Largest decrease between consecutive samples.
    pub fn max_decrease(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0, f64::max)
    }
}

/// Orthonormal frame (a, b) of the normal plane along a pentagon edge in which N = cos ρ · a + sin ρ · b.
pub fn edge_frame(pent: &Pentagon, edge: EdgeTag) -> Result<(Vec4, Vec4)> {
    let (l, w) = (pent.l(), pent.omega());
    match edge {
        EdgeTag::DeltaPlus => Ok((-J, V_MINUS)),
        EdgeTag::BetaPlus => {
            let (sw, cw) = w.sin_cos();
            let nz =
                Vector4::new(sw, -sw, 0.0, 0.0) * std::f64::consts::FRAC_1_SQRT_2 + Vector4::new(0.0, 0.0, cw, 0.0);
            Ok((nz, w_pm(l, 1.0)))
        }
        EdgeTag::Alpha => {
            let ja = match pent.kind {
                PentagonKind::LOmega(p) => face_normals(p.l, p.omega).1,
                PentagonKind::Sigma(_) => {
                    return Err(PlateauError::FrameDegeneracy(
                        "alpha frame needs (l, omega) parameters".into(),
                    ))
                }
            };
            // The normal turns toward −β+′(r̄), into the side of S²_α that holds the disk.
            let tb = pent.beta_plus.tangent_at(pent.r_bar());
            Ok((ja, -tb))
        }
        other => Err(PlateauError::FrameDegeneracy(format!(
            "no normal frame for edge {other:?}"
        ))),
    }
}

/// Measures ρ along a pentagon edge from first-row interior vertices.
///
/// Each interior vertex q adjacent to the edge gives a foot parameter on the
/// edge circle and a conormal direction, the component of q orthogonal to
/// the edge plane. The normal is the conormal turned by a right angle in the
/// normal plane, with its sign matched to the vertex normal. For `Alpha` the
/// profile covers the half α+ from y+ to x.
pub fn rho_profile(mesh: &DiskMesh, pent: &Pentagon, edge: EdgeTag) -> Result<RhoProfile> {
    let (fa, fb) = edge_frame(pent, edge)?;
    let (arc_idx, arc) = mesh
        .arcs
        .iter()
        .enumerate()
        .find(|(_, (t, _))| *t == edge)
        .map(|(i, (_, a))| (i, *a))
        .ok_or_else(|| PlateauError::FrameDegeneracy(format!("edge {edge:?} not in mesh")))?;
    let length = if edge == EdgeTag::Alpha {
        0.5 * arc.length()
    } else {
        arc.length()
    };
    let normals = normal_field(mesh)?;
    let nb = mesh.neighbors();
    let on_arc = |v: usize| mesh.pins[v].iter().any(|p| p.arc == arc_idx);
    let mut seen = vec![false; mesh.vertices.len()];
    let mut samples = Vec::new();
    let c = arc.circle;
    for v in 0..mesh.vertices.len() {
        if !on_arc(v) {
            continue;
        }
        for &q in &nb[v] {
            if mesh.is_pinned(q) || seen[q] {
                continue;
            }
            seen[q] = true;
            let x = mesh.vertices[q];
            let t = c.param_of(&x) - arc.t0;
            if !(t >= 0.0 && t <= length) {
                continue;
            }
            let eta = x - c.plane_part(&x);
            let (ea, eb) = (eta.dot(&fa), eta.dot(&fb));
            let r = (ea * ea + eb * eb).sqrt();
            if r < 1e-14 {
                return Err(PlateauError::FrameDegeneracy("conormal vanishes".into()));
            }
            // Turn the conormal by a right angle: (ea, eb) → (−eb, ea).
            let mut na = -eb / r;
            let mut nbv = ea / r;
            let crude = normals[q];
            if na * crude.dot(&fa) + nbv * crude.dot(&fb) < 0.0 {
                na = -na;
                nbv = -nbv;
            }
            samples.push((t, nbv.atan2(na)));
        }
    }
    if samples.len() < 4 {
        return Err(PlateauError::FrameDegeneracy("too few samples along edge".into()));
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut prev = samples[0].1;
    for s in samples.iter_mut().skip(1) {
        let tau = std::f64::consts::TAU;
        while s.1 - prev > std::f64::consts::PI {
            s.1 -= tau;
        }
        while s.1 - prev < -std::f64::consts::PI {
            s.1 += tau;
        }
        prev = s.1;
    }
    // Shift by a whole turn so that the profile starts near zero.
    let shift = (samples[0].1 / std::f64::consts::TAU).round() * std::f64::consts::TAU;
    for s in samples.iter_mut() {
        s.1 -= shift;
    }
    Ok(RhoProfile { edge, length, samples })
}

/// Minimum over interior vertices of det(N(p), p, i, j).
pub fn graph_min(mesh: &DiskMesh) -> Result<f64> {
    let n = normal_field(mesh)?;
    let mut m = f64::INFINITY;
    for (v, p) in mesh.vertices.iter().enumerate() {
        if mesh.is_pinned(v) {
            continue;
        }
        m = m.min(killing_graph_value(&n[v], p));
    }
    Ok(m)
}

/// det(N, p, i, j).
pub fn killing_graph_value(n: &Vec4, p: &Vec4) -> f64 {
    crate::s3core::det4(n, p, &crate::s3core::I, &J)
}

/// Length of the polyline traced by the normal along the mirror chain.
pub fn normal_chain_length(mesh: &DiskMesh) -> Result<f64> {
    let n = normal_field(mesh)?;
    Ok(mesh.chain.windows(2).map(|w| dist(&n[w[0]], &n[w[1]])).sum())
}

/// Relative order of two disks sharing the mirror sphere S₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskOrder {
    Above,
    Below,
    Incomparable,
    Equal,
}

/// Gnomonic chart of the hemisphere of S₂ centred at `c`, with orthonormal axes `a, b`.
fn gnomonic(c: &Vec4, a: &Vec4, b: &Vec4, p: &Vec4) -> (f64, f64) {
    let d = p.dot(c);
    (p.dot(a) / d, p.dot(b) / d)
}

fn point_in_polygon(pt: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > pt.1) != (yj > pt.1) && pt.0 < (xj - xi) * (pt.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

/// Compares the mirror curves of two disks on S₂.
///
/// Disk 1 lies above disk 2 when γ₁ ∖ {k} lies in the non-convex component
/// of S₂ ∖ (γ₂ ∪ [k, x₂]), that is outside the region bounded by γ₂ and the
/// segment [k, x₂]. Both curves are mapped to a gnomonic chart of S₂
/// centred between them.
pub fn disk_order(m1: &DiskMesh, m2: &DiskMesh) -> Result<DiskOrder> {
    let g1: Vec<Vec4> = m1.chain.iter().map(|&v| m1.vertices[v]).collect();
    let g2: Vec<Vec4> = m2.chain.iter().map(|&v| m2.vertices[v]).collect();
    let same = g1.len() == g2.len() && g1.iter().zip(&g2).all(|(a, b)| (a - b).norm() < 1e-12);
    if same {
        return Ok(DiskOrder::Equal);
    }
    let c = normalize(g1.iter().chain(g2.iter()).sum::<Vec4>());
    let a0 = tangent_part(&c, &crate::s3core::E);
    let a = normalize(tangent_part(&crate::s3core::I, &a0));
    let a = normalize(a - c * c.dot(&a));
    let b = normalize(cross3(&crate::s3core::I, &c, &a));
    let chart = |p: &Vec4| gnomonic(&c, &a, &b, p);
    let region = |g: &[Vec4]| -> Vec<(f64, f64)> {
        let mut poly: Vec<(f64, f64)> = g.iter().map(chart).collect();
        // Closing segment [x, k] is a straight chord in the gnomonic chart.
        poly.dedup();
        poly
    };
    let classify = |g: &[Vec4], other: &[Vec4]| -> Result<(usize, usize)> {
        let poly = region(other);
        let mut inside = 0;
        let mut outside = 0;
        for p in g.iter().skip(1) {
            let pt = chart(p);
            let mut dmin = f64::INFINITY;
            for i in 0..poly.len() {
                let j = (i + 1) % poly.len();
                dmin = dmin.min(segment_distance(pt, poly[i], poly[j]));
            }
            if dmin < 1e-6 {
                continue;
            }
            if point_in_polygon(pt, &poly) {
                inside += 1;
            } else {
                outside += 1;
            }
        }
        Ok((inside, outside))
    };
    let (in12, out12) = classify(&g1, &g2)?;
    let (in21, out21) = classify(&g2, &g1)?;
    if in12 + out12 == 0 && in21 + out21 == 0 {
        return Err(PlateauError::TangencyUndecidable);
    }
    if in12 == 0 && out12 > 0 && out21 == 0 {
        Ok(DiskOrder::Above)
    } else if in21 == 0 && out21 > 0 && out12 == 0 {
        Ok(DiskOrder::Below)
    } else {
        Ok(DiskOrder::Incomparable)
    }
}

/// Discrete shape-operator anisotropy |k₁ − k₂| estimated from normal variation along mesh edges.
///
/// For each vertex the normal derivatives along incident edges are fitted by
/// a symmetric 2×2 operator in a tangent-plane basis by least squares.
pub fn curvature_anisotropy(mesh: &DiskMesh, normals: &[Vec4]) -> Vec<f64> {
    shape_anisotropy(&mesh.vertices, &mesh.neighbors(), normals)
}

/// [`curvature_anisotropy`] for any vertex array with its neighbor lists.
pub fn shape_anisotropy(vertices: &[Vec4], nb: &[Vec<usize>], normals: &[Vec4]) -> Vec<f64> {
    let mut out = vec![f64::NAN; vertices.len()];
    for (v, p) in vertices.iter().enumerate() {
        if nb[v].len() < 3 {
            continue;
        }
        let n = normals[v];
        let e1 = {
            let d = vertices[nb[v][0]] - p;
            let d = d - p * p.dot(&d) - n * n.dot(&d);
            normalize(d)
        };
        let e2 = normalize(cross3(p, &n, &e1));
        // Unknowns s11, s12, s22 with dN(d) ≈ S d in the (e1, e2) basis.
        let mut ata = nalgebra::Matrix3::<f64>::zeros();
        let mut atb = nalgebra::Vector3::<f64>::zeros();
        for &w in &nb[v] {
            let d = vertices[w] - p;
            let dn = normals[w] - n;
            let (x, y) = (d.dot(&e1), d.dot(&e2));
            let (gx, gy) = (dn.dot(&e1), dn.dot(&e2));
            let rows = [
                (nalgebra::Vector3::new(x, y, 0.0), gx),
                (nalgebra::Vector3::new(0.0, x, y), gy),
            ];
            for (r, rhs) in rows {
                ata += r * r.transpose();
                atb += r * rhs;
            }
        }
        if let Some(s) = ata.try_inverse() {
            let x = s * atb;
            let (a, b, c) = (x[0], x[1], x[2]);
            out[v] = ((a - c).powi(2) + 4.0 * b * b).sqrt();
        }
    }
    out
}

/// Cubic smoothing spline with natural end conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSpline {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    /// Second derivatives at the knots.
    pub second: Vec<f64>,
    pub lambda: f64,
}

impl SmoothingSpline {
    fn qr_matrices(t: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = t.len();
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let mut q = DMatrix::zeros(n, n - 2);
        let mut r = DMatrix::zeros(n - 2, n - 2);
        for j in 1..n - 1 {
            let c = j - 1;
            q[(j - 1, c)] = 1.0 / h[j - 1];
            q[(j, c)] = -1.0 / h[j - 1] - 1.0 / h[j];
            q[(j + 1, c)] = 1.0 / h[j];
            r[(c, c)] = (h[j - 1] + h[j]) / 3.0;
            if c + 1 < n - 2 {
                r[(c, c + 1)] = h[j] / 6.0;
                r[(c + 1, c)] = h[j] / 6.0;
            }
        }
        (q, r)
    }

    /// Fits with a given smoothing weight λ on the roughness penalty.
    pub fn fit(t: &[f64], y: &[f64], lambda: f64) -> Self {
        let (t, y) = Self::merge(t, y);
        let n = t.len();
        if n < 3 {
            return Self::linear(&t, &y);
        }
        let (q, r) = Self::qr_matrices(&t);
        let yv = DVector::from_vec(y.clone());
        let a = &r + (q.transpose() * &q) * lambda;
        let gamma = a
            .cholesky()
            .map(|c| c.solve(&(q.transpose() * &yv)))
            .unwrap_or_else(|| DVector::zeros(n - 2));
        let f = &yv - (&q * &gamma) * lambda;
        let mut second = vec![0.0; n];
        for i in 0..n - 2 {
            second[i + 1] = gamma[i];
        }
        Self {
            knots: t,
            values: f.iter().cloned().collect(),
            second,
            lambda,
        }
    }

    /// Fits with λ chosen by generalized cross-validation on a logarithmic grid.
    pub fn fit_gcv(t: &[f64], y: &[f64]) -> Self {
        let (tm, ym) = Self::merge(t, y);
        let n = tm.len();
        if n < 4 {
            return Self::fit(&tm, &ym, 0.0);
        }
        let (q, r) = Self::qr_matrices(&tm);
        // Hat matrix A(λ) = (I + λ Q R⁻¹ Qᵀ)⁻¹; diagonalize K = Q R⁻¹ Qᵀ once.
        let rinv = r
            .clone()
            .try_inverse()
            .unwrap_or_else(|| DMatrix::identity(n - 2, n - 2));
        let k = &q * rinv * q.transpose();
        let k = (&k + k.transpose()) * 0.5;
        let eig = k.symmetric_eigen();
        let yv = DVector::from_vec(ym.clone());
        let uty = eig.eigenvectors.transpose() * &yv;
        let span = tm[n - 1] - tm[0];
        let scale = span.powi(3) / n as f64;
        let mut best = (f64::INFINITY, 0.0);
        for e in -80..=40 {
            let lam = scale * 10f64.powf(e as f64 / 8.0);
            let mut rss = 0.0;
            let mut tr = 0.0;
            for i in 0..n {
                let d = eig.eigenvalues[i].max(0.0);
                let s = 1.0 / (1.0 + lam * d);
                rss += ((1.0 - s) * uty[i]).powi(2);
                tr += s;
            }
            let denom = (1.0 - tr / n as f64).powi(2);
            if denom <= 1e-12 {
                continue;
            }
            let gcv = rss / n as f64 / denom;
            if gcv < best.0 {
                best = (gcv, lam);
            }
        }
        Self::fit(&tm, &ym, best.1)
    }

    fn merge(t: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut pairs: Vec<(f64, f64)> = t.iter().cloned().zip(y.iter().cloned()).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut tt: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut yy: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut cnt: Vec<f64> = Vec::new();
        for (a, b) in pairs {
            if let Some(&last) = tt.last() {
                if (a - last).abs() < 1e-12 {
                    let k = cnt.len() - 1;
                    let c = cnt[k];
                    yy[k] = (yy[k] * c + b) / (c + 1.0);
                    cnt[k] += 1.0;
                    continue;
                }
            }
            tt.push(a);
            yy.push(b);
            cnt.push(1.0);
        }
        (tt, yy)
    }

    fn linear(t: &[f64], y: &[f64]) -> Self {
        Self {
            knots: t.to_vec(),
            values: y.to_vec(),
            second: vec![0.0; t.len()],
            lambda: 0.0,
        }
    }

    fn locate(&self, s: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value at `s`; linear beyond the end knots.
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if n == 1 {
            return self.values[0];
        }
        if s < self.knots[0] {
            return self.values[0] + (s - self.knots[0]) * self.deriv(self.knots[0]);
        }
        if s > self.knots[n - 1] {
            return self.values[n - 1] + (s - self.knots[n - 1]) * self.deriv(self.knots[n - 1]);
        }
        let i = self.locate(s);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - s) / h, (s - t0) / h);
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    /// First derivative at `s`; constant beyond the end knots.
    pub fn deriv(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if n == 1 {
            return 0.0;
        }
        let s = s.clamp(self.knots[0], self.knots[n - 1]);
        let i = self.locate(s);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - s) / h, (s - t0) / h);
        (self.values[i + 1] - self.values[i]) / h
            + ((1.0 - 3.0 * a * a) * self.second[i] + (3.0 * b * b - 1.0) * self.second[i + 1]) * h / 6.0
    }
}
