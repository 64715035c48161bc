//! Assembly of the closed genus-2 surface.
//!
//! The Lawson quadrilateral [p₁, q₁, p₂, q₂] spans a minimal disk that is
//! extended across its boundary arcs by π-rotations. The orbit closes after
//! finitely many copies, which are welded into a closed triangle mesh and
//! checked for topology, area, embeddedness and symmetry.

use crate::pentagon::GeodesicArc;
use crate::plateau::{
    build_fan_mesh, gamma_length, shape_anisotropy, solve_mesh, DiskMesh, EdgeTag, FanSide, FanTemplate, MinimalDisk,
    PlateauError, SolveConfig, TemplateMirror,
};
use crate::s3core::{
    chordal_area, cross3, dist, half_turn, normalize, reflect, segment, stereo, vertex_angle, GeodesicSphere,
    GreatCircle, Isometry, S3Error, Vec4, E, I, J, K, V_MINUS, V_PLUS,
};
use nalgebra::{Vector3, Vector4};
use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::{FRAC_PI_3, PI};
use thiserror::Error;

/// Largest number of disk copies generated by an orbit.
pub const ORBIT_CAP: usize = 64;
/// Chordal distance below which vertices are welded.
pub const WELD_TOL: f64 = 1e-6;
/// Chordal distance below which two copies are the same.
pub const COPY_TOL: f64 = 1e-6;

/// Errors raised during assembly and verification.
#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("welded mesh keeps {boundary_edges} boundary edges; nearest unmatched partner at {gap:.3e}")]
    WeldMismatch { boundary_edges: usize, gap: f64 },
    #[error("orbit exceeds {0} copies")]
    OrbitExplosion(usize),
    #[error("mesh is not closed: {0} boundary edges")]
    NotClosed(usize),
    #[error("mesh is not orientable")]
    NonOrientable,
    #[error(transparent)]
    Plateau(#[from] PlateauError),
    #[error(transparent)]
    S3(#[from] S3Error),
}

pub type Result<T> = std::result::Result<T, AssemblyError>;

/// Labelled isometries forming a finite group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSet {
    pub elements: Vec<(String, Isometry)>,
}

impl GroupSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of an element within `tol` in matrix norm.
    pub fn find(&self, g: &Isometry, tol: f64) -> Option<usize> {
        self.elements.iter().position(|(_, h)| h.distance(g) < tol)
    }

    /// Largest distance from a pairwise product to the set.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (_, a) in &self.elements {
            for (_, b) in &self.elements {
                let ab = a.compose(b);
                let d = self
                    .elements
                    .iter()
                    .map(|(_, h)| h.distance(&ab))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Elements mapping the half-space x4 > 0 to itself.
    pub fn preserving_b4_plus(&self) -> GroupSet {
        GroupSet {
            elements: self
                .elements
                .iter()
                .filter(|(_, g)| g.apply(&K)[3] > 0.5)
                .cloned()
                .collect(),
        }
    }
}

/// Closes a generator list under composition by breadth-first search.
pub fn generate_group(generators: &[(&str, Isometry)], cap: usize) -> GroupSet {
    let mut elements: Vec<(String, Isometry)> = vec![("id".into(), Isometry::identity())];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (name, g) in generators {
            let h = g.compose(&elements[i].1);
            if elements.iter().all(|(_, e)| e.distance(&h) > 1e-9) {
                let label = if elements[i].0 == "id" {
                    name.to_string()
                } else {
                    format!("{name}*{}", elements[i].0)
                };
                elements.push((label, h));
                if elements.len() >= cap {
                    return GroupSet { elements };
                }
                queue.push_back(elements.len() - 1);
            }
        }
    }
    GroupSet { elements }
}

/// π-rotation about Γ_{k,v+}.
pub fn r_star_plus() -> Isometry {
    half_turn(&GreatCircle::new_unchecked(K, V_PLUS))
}

/// π-rotation about Γ_{k,v−}.
pub fn r_star_minus() -> Isometry {
    half_turn(&GreatCircle::new_unchecked(K, V_MINUS))
}

/// The 16 elements generated by R₁, R₂, R₄ and R*₊.
pub fn d4h_elements() -> GroupSet {
    generate_group(
        &[
            ("R1", reflect(&GeodesicSphere::s1())),
            ("R2", reflect(&GeodesicSphere::s2())),
            ("R4", reflect(&GeodesicSphere::s4())),
            ("R*+", r_star_plus()),
        ],
        4 * ORBIT_CAP,
    )
}

/// The geodesic quadrilateral [p₁, q₁, p₂, q₂].
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrilateral {
    pub p1: Vec4,
    pub q1: Vec4,
    pub p2: Vec4,
    pub q2: Vec4,
    /// Sides p₁q₁, q₁p₂, p₂q₂, q₂p₁.
    pub sides: [GeodesicArc; 4],
}

impl Quadrilateral {
    pub fn vertices(&self) -> [Vec4; 4] {
        [self.p1, self.q1, self.p2, self.q2]
    }

    /// Interior angles at p₁, q₁, p₂, q₂.
    pub fn angles(&self) -> [f64; 4] {
        let v = self.vertices();
        std::array::from_fn(|i| vertex_angle(&v[i], &v[(i + 3) % 4], &v[(i + 1) % 4]))
    }

    /// Largest deviation of the angles at p₁ and p₂ from π/2.
    pub fn right_angle_residual(&self) -> f64 {
        let a = self.angles();
        (a[0] - PI / 2.0).abs().max((a[2] - PI / 2.0).abs())
    }
}

/// p₁ = cos(π/3)k + sin(π/3)j, q₁ = v+, p₂ = k, q₂ = v−.
pub fn lawson_quadrilateral() -> Quadrilateral {
    let p1 = K * FRAC_PI_3.cos() + J * FRAC_PI_3.sin();
    let (q1, p2, q2) = (V_PLUS, K, V_MINUS);
    let side = |a: &Vec4, b: &Vec4| {
        let (c, len) = segment(a, b).expect("quadrilateral vertices are not antipodal");
        GeodesicArc::new(c, 0.0, len)
    };
    Quadrilateral {
        p1,
        q1,
        p2,
        q2,
        sides: [side(&p1, &q1), side(&q1, &p2), side(&p2, &q2), side(&q2, &p1)],
    }
}

/// Reflection in the sphere through e and i that swaps p₁ and p₂.
pub fn reflect_perp(q: &Quadrilateral) -> Isometry {
    reflect(&GeodesicSphere::from_normal(normalize(q.p1 - q.p2)))
}

/// Square fan template of the quadrilateral with the mirrors S₂ and S(Γ⊥).
///
/// Corners p₁, q₁, p₂, q₂ sit at angles 270°, 0°, 90°, 180°; the mirror
/// chain runs from p₂ through the centre to p₁ inside S₂.
pub fn lawson_template(q: &Quadrilateral) -> FanTemplate {
    FanTemplate {
        corners: vec![[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]],
        sides: (0..4)
            .map(|s| FanSide {
                arc: s,
                t0: 0.0,
                t1: q.sides[s].length(),
            })
            .collect(),
        arcs: (0..4).map(|s| (EdgeTag::Side(s), q.sides[s])).collect(),
        mirrors: vec![
            TemplateMirror {
                axis_normal: [1.0, 0.0],
                iso: reflect(&GeodesicSphere::s2()),
            },
            TemplateMirror {
                axis_normal: [0.0, 1.0],
                iso: reflect_perp(q),
            },
        ],
        chain: Some((2, 0)),
        anchor_corner: 2,
        anchor_normal: -J,
        anchor_reflex: false,
        centre: None,
        chart: None,
    }
}

/// The solved Lawson disk with its mirror-chain measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct LawsonDisk {
    pub quad: Quadrilateral,
    pub disk: MinimalDisk,
    /// Length of the disk's trace on S₂ per refinement level.
    pub l_levels: Vec<f64>,
    /// Extrapolated length l_L.
    pub l_lawson: f64,
}

/// Solves the Plateau problem for the Lawson quadrilateral.
pub fn solve_lawson_disk(cfg: &SolveConfig) -> Result<LawsonDisk> {
    let quad = lawson_quadrilateral();
    let mesh = build_fan_mesh(&lawson_template(&quad), cfg.n - 1, cfg.n)?;
    let disk = solve_mesh(mesh, cfg, None)?;
    let (l_levels, l_lawson) = gamma_length(&disk)?;
    Ok(LawsonDisk {
        quad,
        disk,
        l_levels,
        l_lawson,
    })
}

/// A triangle mesh on S³.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec4>,
    pub triangles: Vec<[usize; 3]>,
    pub closed: bool,
}

impl SurfaceMesh {
    /// Builds a mesh and records whether it is closed.
    pub fn new(vertices: Vec<Vec4>, triangles: Vec<[usize; 3]>) -> Self {
        let mut m = Self {
            vertices,
            triangles,
            closed: false,
        };
        m.closed = m.boundary_edges().is_empty();
        m
    }

    /// Undirected edges with the number of incident triangles.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut out = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *out.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        out
    }

    /// Edges with a single incident triangle.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .edge_counts()
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(e, _)| e)
            .collect();
        e.sort_unstable();
        e
    }

    /// Neighbor lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if !nb[a].contains(&b) {
                    nb[a].push(b);
                }
                if !nb[b].contains(&a) {
                    nb[b].push(a);
                }
            }
        }
        nb
    }

    /// Image under an isometry, with the triangle order kept.
    pub fn transformed(&self, g: &Isometry) -> SurfaceMesh {
        SurfaceMesh {
            vertices: self.vertices.iter().map(|v| g.apply(v)).collect(),
            triangles: self.triangles.clone(),
            closed: self.closed,
        }
    }

    /// Unit normals at the vertices from the triangle orientation.
    pub fn vertex_normals(&self) -> Vec<Vec4> {
        let mut acc = vec![Vec4::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let n = cross3(&((a + b + c) / 3.0), &(b - a), &(c - a));
            for &i in t {
                acc[i] += n;
            }
        }
        acc.into_iter()
            .zip(&self.vertices)
            .map(|(n, p)| normalize(n - p * p.dot(&n)))
            .collect()
    }
}

/// Uniform-grid hash of points in R⁴.
struct PointIndex {
    cell: f64,
    map: HashMap<[i64; 4], Vec<usize>>,
}

impl PointIndex {
    fn new(points: &[Vec4], cell: f64) -> Self {
        let mut map: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(p, cell)).or_default().push(i);
        }
        Self { cell, map }
    }

    fn key(p: &Vec4, cell: f64) -> [i64; 4] {
        std::array::from_fn(|k| (p[k] / cell).floor() as i64)
    }

    /// Indices of points within `radius` ≤ `cell` of `q`.
    fn near(&self, points: &[Vec4], q: &Vec4, radius: f64) -> Vec<usize> {
        let c = Self::key(q, self.cell);
        let mut out = Vec::new();
        for d in 0..81 {
            let off = [d % 3, (d / 3) % 3, (d / 9) % 3, d / 27].map(|o| o as i64 - 1);
            let key = std::array::from_fn(|k| c[k] + off[k]);
            if let Some(list) = self.map.get(&key) {
                out.extend(list.iter().copied().filter(|&i| (points[i] - q).norm() <= radius));
            }
        }
        out
    }

    /// Nearest point to `q` within `cell`, if any.
    fn nearest(&self, points: &[Vec4], q: &Vec4) -> Option<(usize, f64)> {
        self.near(points, q, self.cell)
            .into_iter()
            .map(|i| (i, (points[i] - q).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Merges vertices closer than `tol`, averaging and renormalizing each cluster.
///
/// Triangles that collapse are dropped.
pub fn weld(vertices: &[Vec4], triangles: &[[usize; 3]], tol: f64) -> SurfaceMesh {
    let index = PointIndex::new(vertices, 4.0 * tol);
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    for (i, v) in vertices.iter().enumerate() {
        for j in index.near(vertices, v, tol) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut id = vec![usize::MAX; vertices.len()];
    let mut sums: Vec<Vec4> = Vec::new();
    for i in 0..vertices.len() {
        let r = find(&mut parent, i);
        if id[r] == usize::MAX {
            id[r] = sums.len();
            sums.push(Vec4::zeros());
        }
        id[i] = id[r];
        sums[id[i]] += vertices[i];
    }
    let merged: Vec<Vec4> = sums.into_iter().map(normalize).collect();
    let tris = triangles
        .iter()
        .map(|t| t.map(|i| id[i]))
        .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
        .collect();
    SurfaceMesh::new(merged, tris)
}

/// Reorients triangles so that every interior edge is traversed in opposite directions.
pub fn orient_consistently(mesh: &mut SurfaceMesh) -> Result<()> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, t) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    let directed = |t: &[usize; 3], a: usize, b: usize| (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
    let nf = mesh.triangles.len();
    let mut seen = vec![false; nf];
    for root in 0..nf {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(f) = queue.pop_front() {
            let t = mesh.triangles[f];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                for &g in &by_edge[&(a.min(b), a.max(b))] {
                    if g == f {
                        continue;
                    }
                    let clash = directed(&mesh.triangles[g], a, b);
                    if seen[g] {
                        if clash {
                            return Err(AssemblyError::NonOrientable);
                        }
                        continue;
                    }
                    if clash {
                        mesh.triangles[g].swap(1, 2);
                    }
                    seen[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    Ok(())
}

/// A disk with the great circles carrying its boundary arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalPiece {
    pub mesh: SurfaceMesh,
    pub axes: Vec<GreatCircle>,
}

impl FundamentalPiece {
    /// The finest mesh of a solved disk with the circles of its arcs.
    pub fn from_disk(mesh: &DiskMesh) -> Self {
        Self {
            mesh: SurfaceMesh::new(mesh.vertices.clone(), mesh.triangles.clone()),
            axes: mesh.arcs.iter().map(|(_, a)| a.circle).collect(),
        }
    }
}

/// Result of an orbit assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    pub mesh: SurfaceMesh,
    /// Isometry placing each copy, starting with the identity.
    pub copies: Vec<Isometry>,
}

fn copy_signature(piece: &SurfaceMesh, g: &Isometry) -> Vec<Vec4> {
    let n = piece.vertices.len() as f64;
    let mean = piece.vertices.iter().fold(Vec4::zeros(), |a, v| a + v) / n;
    vec![g.apply(&mean)]
}

/// Whether two vertex sets coincide within `tol` in Hausdorff distance.
fn same_vertex_set(a: &[Vec4], b: &[Vec4], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let index = PointIndex::new(b, 4.0 * tol);
    a.iter().all(|p| index.nearest(b, p).is_some_and(|(_, d)| d <= tol))
}

/// Welds copies of a piece and checks that the result is closed and orientable.
fn weld_copies(piece: &SurfaceMesh, copies: &[Isometry]) -> Result<SurfaceMesh> {
    let nv = piece.vertices.len();
    let mut verts = Vec::with_capacity(nv * copies.len());
    let mut tris = Vec::with_capacity(piece.triangles.len() * copies.len());
    for (c, g) in copies.iter().enumerate() {
        verts.extend(piece.vertices.iter().map(|v| g.apply(v)));
        tris.extend(piece.triangles.iter().map(|t| t.map(|i| i + c * nv)));
    }
    let mut mesh = weld(&verts, &tris, WELD_TOL);
    let open = mesh.boundary_edges();
    if !open.is_empty() {
        let ends: HashSet<usize> = open.iter().flat_map(|&(a, b)| [a, b]).collect();
        let index = PointIndex::new(&mesh.vertices, 1e-2);
        let gap = ends
            .iter()
            .filter_map(|&v| {
                index
                    .near(&mesh.vertices, &mesh.vertices[v], 1e-2)
                    .into_iter()
                    .filter(|&w| w != v && ends.contains(&w))
                    .map(|w| (mesh.vertices[w] - mesh.vertices[v]).norm())
                    .min_by(f64::total_cmp)
            })
            .fold(f64::INFINITY, f64::min);
        return Err(AssemblyError::WeldMismatch {
            boundary_edges: open.len(),
            gap,
        });
    }
    orient_consistently(&mut mesh)?;
    Ok(mesh)
}

/// Extends a piece by π-rotations about its boundary circles until the orbit closes.
///
/// Copies whose vertex sets agree within [`COPY_TOL`] are identified.
pub fn orbit_assemble(piece: &FundamentalPiece) -> Result<Assembled> {
    let mut copies = vec![Isometry::identity()];
    let mut signatures = vec![copy_signature(&piece.mesh, &copies[0])];
    let mut images: Vec<Vec<Vec4>> = vec![piece.mesh.vertices.clone()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        let g = copies[c];
        for axis in &piece.axes {
            let moved = GreatCircle::new_unchecked(g.apply(&axis.p), g.apply(&axis.v));
            let h = half_turn(&moved).compose(&g);
            let sig = copy_signature(&piece.mesh, &h);
            let verts: Vec<Vec4> = piece.mesh.vertices.iter().map(|v| h.apply(v)).collect();
            let known = signatures.iter().zip(&images).any(|(s, im)| {
                s.iter().zip(&sig).all(|(a, b)| (a - b).norm() < COPY_TOL) && same_vertex_set(im, &verts, COPY_TOL)
            });
            if known {
                continue;
            }
            if copies.len() >= ORBIT_CAP {
                return Err(AssemblyError::OrbitExplosion(ORBIT_CAP));
            }
            copies.push(h);
            signatures.push(sig);
            images.push(verts);
            queue.push_back(copies.len() - 1);
        }
    }
    let mesh = weld_copies(&piece.mesh, &copies)?;
    Ok(Assembled { mesh, copies })
}

/// Applies every element of a group to a piece and welds the images.
pub fn group_assemble(piece: &SurfaceMesh, group: &GroupSet) -> Result<Assembled> {
    let copies: Vec<Isometry> = group.elements.iter().map(|(_, g)| *g).collect();
    let mesh = weld_copies(piece, &copies)?;
    Ok(Assembled { mesh, copies })
}

/// Triangles of the quarter T of the Lawson disk bounded by [p₁, q₁] and the two symmetry arcs.
pub fn lawson_quarter(disk: &DiskMesh, quad: &Quadrilateral) -> SurfaceMesh {
    let n_perp = normalize(quad.p1 - quad.p2);
    let tris: Vec<[usize; 3]> = disk
        .triangles
        .iter()
        .filter(|t| {
            let c = t.iter().fold(Vec4::zeros(), |a, &i| a + disk.vertices[i]);
            c.dot(&I) > 0.0 && c.dot(&n_perp) > 0.0
        })
        .copied()
        .collect();
    compact(&disk.vertices, &tris)
}

fn compact(vertices: &[Vec4], triangles: &[[usize; 3]]) -> SurfaceMesh {
    let mut id = HashMap::new();
    let mut verts = Vec::new();
    let tris = triangles
        .iter()
        .map(|t| {
            t.map(|i| {
                *id.entry(i).or_insert_with(|| {
                    verts.push(vertices[i]);
                    verts.len() - 1
                })
            })
        })
        .collect();
    SurfaceMesh::new(verts, tris)
}

/// The piece F* = T ∪ R⊥(T) ∪ R*(T), with R* the π-rotation about the circle of [p₁, q₁].
pub fn d4h_piece(disk: &DiskMesh, quad: &Quadrilateral) -> SurfaceMesh {
    let t = lawson_quarter(disk, quad);
    let r_star = half_turn(&quad.sides[0].circle);
    let parts = [Isometry::identity(), reflect_perp(quad), r_star];
    let nv = t.vertices.len();
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (c, g) in parts.iter().enumerate() {
        verts.extend(t.vertices.iter().map(|v| g.apply(v)));
        tris.extend(t.triangles.iter().map(|tr| tr.map(|i| i + c * nv)));
    }
    weld(&verts, &tris, WELD_TOL)
}

/// Euler characteristic and genus of a closed mesh.
pub fn euler_genus(mesh: &SurfaceMesh) -> Result<(i64, i64)> {
    let open = mesh.boundary_edges().len();
    if open > 0 {
        return Err(AssemblyError::NotClosed(open));
    }
    let v = mesh.vertices.len() as i64;
    let e = mesh.edge_counts().len() as i64;
    let f = mesh.triangles.len() as i64;
    let chi = v - e + f;
    Ok((chi, (2 - chi) / 2))
}

/// Sum of chordal triangle areas.
pub fn total_area(mesh: &SurfaceMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| chordal_area(&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]]))
        .sum()
}

/// `copies` times the Richardson-extrapolated area of the piece's ladder.
pub fn extrapolated_total_area(disk: &MinimalDisk, copies: usize) -> f64 {
    copies as f64 * disk.area_extrapolated()
}

/// Outcome of the self-intersection search.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionReport {
    pub candidate_pairs: usize,
    pub intersections: usize,
    /// Up to ten intersecting triangle pairs.
    pub examples: Vec<(usize, usize)>,
}

impl IntersectionReport {
    pub fn embedded(&self) -> bool {
        self.intersections == 0
    }
}

type Box4 = ([f64; 4], [f64; 4]);

fn bbox(points: &[Vec4]) -> Box4 {
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for p in points {
        for k in 0..4 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn boxes_overlap(a: &Box4, b: &Box4) -> bool {
    (0..4).all(|k| a.0[k] <= b.1[k] && b.0[k] <= a.1[k])
}

/// Whether segment [p, q] meets triangle (a, b, c) at an interior point of both.
fn segment_hits_triangle(
    p: &Vector3<f64>,
    q: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> bool {
    let eps = 1e-12;
    let d = q - p;
    let (e1, e2) = (b - a, c - a);
    let h = d.cross(&e2);
    let det = e1.dot(&h);
    let scale = e1.norm() * e2.norm() * d.norm();
    if det.abs() <= eps * scale {
        return false;
    }
    let s = p - a;
    let u = s.dot(&h) / det;
    let qv = s.cross(&e1);
    let v = d.dot(&qv) / det;
    let t = e2.dot(&qv) / det;
    u > eps && v > eps && u + v < 1.0 - eps && t > eps && t < 1.0 - eps
}

/// Transversal intersection test of two triangles in R³ by edge piercing.
pub fn triangles_intersect(a: &[Vector3<f64>; 3], b: &[Vector3<f64>; 3]) -> bool {
    (0..3).any(|k| segment_hits_triangle(&a[k], &a[(k + 1) % 3], &b[0], &b[1], &b[2]))
        || (0..3).any(|k| segment_hits_triangle(&b[k], &b[(k + 1) % 3], &a[0], &a[1], &a[2]))
}

/// Tests two chordal triangles in the stereographic chart centred opposite their centroid.
fn chordal_pair_intersects(a: &[Vec4; 3], b: &[Vec4; 3]) -> bool {
    let c = a.iter().chain(b.iter()).fold(Vec4::zeros(), |s, v| s + v);
    let Some(rot) = rotation_to_k(&normalize(c)) else {
        return false;
    };
    let chart = |v: &Vec4| stereo(&rot.apply(v)).ok();
    let pa: Option<Vec<_>> = a.iter().map(chart).collect();
    let pb: Option<Vec<_>> = b.iter().map(chart).collect();
    match (pa, pb) {
        (Some(pa), Some(pb)) => triangles_intersect(&[pa[0], pa[1], pa[2]], &[pb[0], pb[1], pb[2]]),
        _ => false,
    }
}

/// A reflection-pair rotation of S³ taking `p` to k.
fn rotation_to_k(p: &Vec4) -> Option<Isometry> {
    let d = p - K;
    if d.norm() < 1e-12 {
        return Some(Isometry::identity());
    }
    // Reflection through the bisector of p and k, then through k⊥'s mirror keeps det = +1.
    let r1 = reflect(&GeodesicSphere::from_normal(normalize(d)));
    let r2 = reflect(&GeodesicSphere::from_normal(E));
    Some(r2.compose(&r1))
}

/// Triangle pairs that cross, found by a 4-space grid broad phase and a
/// stereographic narrow phase. Pairs sharing a vertex are skipped.
pub fn self_intersection_check(mesh: &SurfaceMesh) -> IntersectionReport {
    let tri_pts: Vec<[Vec4; 3]> = mesh.triangles.iter().map(|t| t.map(|i| mesh.vertices[i])).collect();
    let boxes: Vec<Box4> = tri_pts.iter().map(|t| bbox(t)).collect();
    let cell = boxes
        .iter()
        .map(|(lo, hi)| (0..4).map(|k| hi[k] - lo[k]).fold(0.0, f64::max))
        .fold(1e-9, f64::max);
    let key = |x: &[f64; 4]| -> [i64; 4] { std::array::from_fn(|k| (x[k] / cell).floor() as i64) };
    let mut grid: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
    for (f, b) in boxes.iter().enumerate() {
        let (lo, hi) = (key(&b.0), key(&b.1));
        for c0 in lo[0]..=hi[0] {
            for c1 in lo[1]..=hi[1] {
                for c2 in lo[2]..=hi[2] {
                    for c3 in lo[3]..=hi[3] {
                        grid.entry([c0, c1, c2, c3]).or_default().push(f);
                    }
                }
            }
        }
    }
    let mut report = IntersectionReport {
        candidate_pairs: 0,
        intersections: 0,
        examples: Vec::new(),
    };
    let mut cells: Vec<_> = grid.iter().collect();
    cells.sort_unstable_by_key(|(k, _)| **k);
    for (cell_key, list) in cells {
        for (x, &f) in list.iter().enumerate() {
            for &g in &list[x + 1..] {
                let (bf, bg) = (&boxes[f], &boxes[g]);
                if !boxes_overlap(bf, bg) {
                    continue;
                }
                // Count each pair once: in the cell holding the low corner of the box overlap.
                let lo: [f64; 4] = std::array::from_fn(|k| bf.0[k].max(bg.0[k]));
                if key(&lo) != *cell_key {
                    continue;
                }
                let (tf, tg) = (mesh.triangles[f], mesh.triangles[g]);
                if tf.iter().any(|v| tg.contains(v)) {
                    continue;
                }
                report.candidate_pairs += 1;
                if chordal_pair_intersects(&tri_pts[f], &tri_pts[g]) {
                    report.intersections += 1;
                    if report.examples.len() < 10 {
                        report.examples.push((f.min(g), f.max(g)));
                    }
                }
            }
        }
    }
    report
}

/// Largest distance from the image of a vertex under a group element to the nearest mesh vertex.
pub fn symmetry_residual(mesh: &SurfaceMesh, group: &GroupSet) -> f64 {
    let index = PointIndex::new(&mesh.vertices, 1e-3);
    let mut worst: f64 = 0.0;
    for (_, g) in &group.elements {
        for v in &mesh.vertices {
            let d = index
                .nearest(&mesh.vertices, &g.apply(v))
                .map_or(f64::INFINITY, |(_, d)| d);
            worst = worst.max(d);
        }
    }
    worst
}

/// The `count` lowest local minima of the curvature anisotropy, at least `separation` apart.
pub fn umbilic_candidates(mesh: &SurfaceMesh, count: usize, separation: f64) -> Vec<Vec4> {
    let normals = mesh.vertex_normals();
    let an = shape_anisotropy(&mesh.vertices, &mesh.neighbors(), &normals);
    let mut order: Vec<usize> = (0..mesh.vertices.len()).filter(|&i| an[i].is_finite()).collect();
    order.sort_by(|&a, &b| an[a].total_cmp(&an[b]));
    let mut picked: Vec<Vec4> = Vec::new();
    for i in order {
        let p = mesh.vertices[i];
        if picked.iter().all(|q| dist(q, &p) > separation) {
            picked.push(p);
            if picked.len() == count {
                break;
            }
        }
    }
    picked
}

/// Verification summary of an assembled surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceReport {
    pub chi: i64,
    pub genus: i64,
    pub area: f64,
    pub area_extrapolated: f64,
    pub intersections: usize,
    pub symmetry_residual: f64,
    pub copies: usize,
}

/// Geodesic icosphere of the great sphere orthogonal to `normal`, with `level` subdivisions.
pub fn great_sphere_mesh(normal: &Vec4, level: usize) -> SurfaceMesh {
    let s = GeodesicSphere::from_normal(normalize(*normal));
    let [b0, b1, b2] = s.basis();
    let lift = |x: Vector3<f64>| normalize(b0 * x[0] + b1 * x[1] + b2 * x[2]);
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let base = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut pts: Vec<Vector3<f64>> = base.iter().map(|p| Vector3::from(*p).normalize()).collect();
    let mut tris: Vec<[usize; 3]> = faces.to_vec();
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        for t in &tris {
            let mut m = [0; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m[k] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    pts.push((pts[a] + pts[b]).normalize());
                    pts.len() - 1
                });
            }
            next.extend([
                [t[0], m[0], m[2]],
                [t[1], m[1], m[0]],
                [t[2], m[2], m[1]],
                [m[0], m[1], m[2]],
            ]);
        }
        tris = next;
    }
    SurfaceMesh::new(pts.into_iter().map(lift).collect(), tris)
}

/// The Clifford torus (cos u, sin u, cos v, sin v)/√2 on an `n` × `n` grid.
pub fn clifford_torus_mesh(n: usize) -> SurfaceMesh {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut verts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (2.0 * PI * i as f64 / n as f64, 2.0 * PI * j as f64 / n as f64);
            verts.push(Vector4::new(u.cos(), u.sin(), v.cos(), v.sin()) * s);
        }
    }
    let id = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut tris = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SurfaceMesh::new(verts, tris)
}
