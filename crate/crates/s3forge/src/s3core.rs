//! Exact ambient geometry of the unit 3-sphere S³ ⊂ R⁴.
//!
//! Points are unit 4-vectors. Great circles, totally geodesic two-spheres,
//! isometries, Killing fields, helicoids, stereographic projection and
//! spherical triangle areas are provided as pure value types and functions.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use thiserror::Error;

/// Ambient 4-vector.
pub type Vec4 = Vector4<f64>;
/// Ambient 4×4 matrix.
pub type Mat4 = Matrix4<f64>;

/// Tolerance on unit norms and orthonormality.
pub const UNIT_TOL: f64 = 1e-12;
/// Distance to an antipode or to the projection pole below which a point is singular.
pub const ANTIPODAL_EPS: f64 = 1e-9;
/// Volume threshold below which three points are treated as lying on one great circle.
pub const COLLINEAR_EPS: f64 = 1e-10;

/// Errors raised by the ambient geometry layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum S3Error {
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("vectors are not orthonormal (residual {0:e})")]
    NotOrthonormal(f64),
    #[error("segment endpoints are antipodal (distance {0})")]
    AntipodalEndpoints(f64),
    #[error("point is within {ANTIPODAL_EPS:e} of the projection pole -k")]
    PoleSingularity,
    #[error("triangle vertices lie on one great circle (volume {0:e})")]
    DegenerateTriangle(f64),
    #[error("point does not lie on the sphere (residual {0:e})")]
    OffSphere(f64),
    #[error("the two spheres coincide")]
    IdenticalSpheres,
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, S3Error>;

/// e = (1,0,0,0).
pub const E: Vec4 = Vector4::new(1.0, 0.0, 0.0, 0.0);
/// i = (0,1,0,0).
pub const I: Vec4 = Vector4::new(0.0, 1.0, 0.0, 0.0);
/// j = (0,0,1,0).
pub const J: Vec4 = Vector4::new(0.0, 0.0, 1.0, 0.0);
/// k = (0,0,0,1).
pub const K: Vec4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
/// v₊ = (cos π/4, sin π/4, 0, 0).
pub const V_PLUS: Vec4 = Vector4::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0);
/// v₋ = (cos π/4, −sin π/4, 0, 0).
pub const V_MINUS: Vec4 = Vector4::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0);

/// Clamps an inverse-trig argument into [−1, 1].
#[inline]
pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Normalizes a nonzero 4-vector.
#[inline]
pub fn normalize(v: Vec4) -> Vec4 {
    v / v.norm()
}

/// The component of `v` orthogonal to the unit vector `p`.
#[inline]
pub fn tangent_part(p: &Vec4, v: &Vec4) -> Vec4 {
    v - p * p.dot(v)
}

/// Generalized cross product: the vector `n` with `⟨n, x⟩ = det[a, b, c, x]` for all `x`.
pub fn cross3(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let m = |r0: usize, r1: usize, r2: usize| {
        Matrix3::new(
            a[r0], b[r0], c[r0], //
            a[r1], b[r1], c[r1], //
            a[r2], b[r2], c[r2],
        )
        .determinant()
    };
    Vector4::new(-m(1, 2, 3), m(0, 2, 3), -m(0, 1, 3), m(0, 1, 2))
}

/// Determinant of the matrix with columns `a, b, c, d`.
pub fn det4(a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4) -> f64 {
    cross3(a, b, c).dot(d)
}

/// A point of S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S3Point(Vec4);

impl S3Point {
    /// Wraps a vector that must already have unit norm within [`UNIT_TOL`].
    pub fn new(v: Vec4) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(S3Error::NotUnit(n));
        }
        Ok(Self(v))
    }

    /// Builds a point by radially projecting a nonzero vector.
    pub fn from_unnormalized(v: Vec4) -> Self {
        Self(normalize(v))
    }

    /// Builds a point from coordinates, normalizing them.
    pub fn from_coords(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self::from_unnormalized(Vector4::new(x1, x2, x3, x4))
    }

    /// The ambient vector.
    #[inline]
    pub fn vec(&self) -> Vec4 {
        self.0
    }

    pub fn e() -> Self {
        Self(E)
    }
    pub fn i() -> Self {
        Self(I)
    }
    pub fn j() -> Self {
        Self(J)
    }
    pub fn k() -> Self {
        Self(K)
    }
    pub fn v_plus() -> Self {
        Self(V_PLUS)
    }
    pub fn v_minus() -> Self {
        Self(V_MINUS)
    }
}

impl From<S3Point> for Vec4 {
    fn from(p: S3Point) -> Vec4 {
        p.0
    }
}

/// A unit tangent vector of S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTangent {
    pub base: S3Point,
    pub dir: Vec4,
}

impl UnitTangent {
    /// Validates orthogonality and unit length of the direction.
    pub fn new(base: S3Point, dir: Vec4) -> Result<Self> {
        let n = dir.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(S3Error::NotUnit(n));
        }
        let d = base.vec().dot(&dir).abs();
        if d > UNIT_TOL {
            return Err(S3Error::NotOrthonormal(d));
        }
        Ok(Self { base, dir })
    }
}

/// Spherical distance, `arccos⟨p,q⟩` with explicit clamping.
pub fn dist(p: &Vec4, q: &Vec4) -> f64 {
    // The half-chord form keeps full precision for nearby points.
    let c = p.dot(q);
    if c.abs() < 0.9 {
        clamp_unit(c).acos()
    } else if c > 0.0 {
        2.0 * (0.5 * (p - q).norm()).min(1.0).asin()
    } else {
        PI - 2.0 * (0.5 * (p + q).norm()).min(1.0).asin()
    }
}

/// Great circle Γ_{p,v}(t) = cos t · p + sin t · v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatCircle {
    pub p: Vec4,
    pub v: Vec4,
}

impl GreatCircle {
    /// Validates the orthonormality of `{p, v}`.
    pub fn new(p: Vec4, v: Vec4) -> Result<Self> {
        let r = (p.norm() - 1.0).abs().max((v.norm() - 1.0).abs()).max(p.dot(&v).abs());
        if r > 1e-10 {
            return Err(S3Error::NotOrthonormal(r));
        }
        Ok(Self { p, v })
    }

    /// Builds the circle from an orthonormal pair without validation.
    pub fn new_unchecked(p: Vec4, v: Vec4) -> Self {
        Self { p, v }
    }

    /// Arc-length point at `t`.
    #[inline]
    pub fn point(&self, t: f64) -> Vec4 {
        let (s, c) = t.sin_cos();
        self.p * c + self.v * s
    }

    /// Unit tangent at `t`.
    #[inline]
    pub fn tangent(&self, t: f64) -> Vec4 {
        let (s, c) = t.sin_cos();
        self.v * c - self.p * s
    }

    /// Parameter of the point of the circle closest to `x`.
    #[inline]
    pub fn param_of(&self, x: &Vec4) -> f64 {
        self.v.dot(x).atan2(self.p.dot(x))
    }

    /// Orthogonal projection of `x` onto the plane of the circle.
    #[inline]
    pub fn plane_part(&self, x: &Vec4) -> Vec4 {
        self.p * self.p.dot(x) + self.v * self.v.dot(x)
    }

    /// A positively oriented orthonormal frame `{p, v, q, w}` completing the circle.
    pub fn complete_frame(&self) -> [Vec4; 4] {
        let (q, w) = complete_pair(&self.p, &self.v);
        [self.p, self.v, q, w]
    }
}

/// Completes an orthonormal pair to a positively oriented orthonormal basis.
pub fn complete_pair(p: &Vec4, v: &Vec4) -> (Vec4, Vec4) {
    let mut extra: Vec<Vec4> = Vec::with_capacity(2);
    let mut cands = [E, I, J, K];
    cands.sort_by(|a, b| {
        let ra = tangent_part(v, &tangent_part(p, a)).norm();
        let rb = tangent_part(v, &tangent_part(p, b)).norm();
        rb.partial_cmp(&ra).unwrap()
    });
    for c in cands {
        let mut r = tangent_part(v, &tangent_part(p, &c));
        for x in &extra {
            r = tangent_part(x, &r);
        }
        if r.norm() > 0.1 {
            extra.push(normalize(r));
        }
        if extra.len() == 2 {
            break;
        }
    }
    let (q, mut w) = (extra[0], extra[1]);
    if det4(p, v, &q, &w) < 0.0 {
        w = -w;
    }
    (q, w)
}

/// Minimizing segment from `p` to `q`: the circle through `p` towards `q` and the interval length.
pub fn segment(p: &Vec4, q: &Vec4) -> Result<(GreatCircle, f64)> {
    let d = dist(p, q);
    if d >= PI - ANTIPODAL_EPS {
        return Err(S3Error::AntipodalEndpoints(d));
    }
    let t = tangent_part(p, q);
    let v = if t.norm() < 1e-15 {
        // Coincident endpoints: any tangent direction spans a zero-length segment.
        let (a, _) = complete_pair(p, &normalize(tangent_part(p, &E.add_scalar(0.3))));
        a
    } else {
        normalize(t)
    };
    Ok((GreatCircle::new_unchecked(*p, v), d))
}

/// Totally geodesic two-sphere S³ ∩ n⊥.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSphere {
    pub normal: Vec4,
}

impl GeodesicSphere {
    /// Validates the unit normal.
    pub fn new(normal: Vec4) -> Result<Self> {
        let n = normal.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(S3Error::NotUnit(n));
        }
        Ok(Self { normal })
    }

    /// Sphere with normal proportional to a nonzero vector.
    pub fn from_normal(n: Vec4) -> Self {
        Self { normal: normalize(n) }
    }

    /// The sphere through three linearly independent unit vectors.
    pub fn through(a: &Vec4, b: &Vec4, c: &Vec4) -> Result<Self> {
        let n = cross3(a, b, c);
        let vol = n.norm();
        if vol < COLLINEAR_EPS {
            return Err(S3Error::DegenerateTriangle(vol));
        }
        Ok(Self { normal: n / vol })
    }

    /// S₁ = e⊥.
    pub fn s1() -> Self {
        Self { normal: E }
    }
    /// S₂ = i⊥.
    pub fn s2() -> Self {
        Self { normal: I }
    }
    /// S₃ = j⊥.
    pub fn s3() -> Self {
        Self { normal: J }
    }
    /// S₄ = k⊥.
    pub fn s4() -> Self {
        Self { normal: K }
    }

    /// Signed membership value ⟨p, n⟩.
    #[inline]
    pub fn side(&self, p: &Vec4) -> f64 {
        self.normal.dot(p)
    }

    /// Membership within `tol`.
    #[inline]
    pub fn contains(&self, p: &Vec4, tol: f64) -> bool {
        self.side(p).abs() <= tol
    }

    /// Orthonormal basis `(a, b, c)` of the 3-space n⊥, positively oriented with `n` last.
    pub fn basis(&self) -> [Vec4; 3] {
        let n = self.normal;
        let mut out: Vec<Vec4> = Vec::with_capacity(3);
        let mut cands = [E, I, J, K];
        cands.sort_by(|a, b| {
            tangent_part(&n, b)
                .norm()
                .partial_cmp(&tangent_part(&n, a).norm())
                .unwrap()
        });
        for c in cands {
            let mut r = tangent_part(&n, &c);
            for x in &out {
                r = tangent_part(x, &r);
            }
            if r.norm() > 0.1 {
                out.push(normalize(r));
            }
            if out.len() == 3 {
                break;
            }
        }
        if det4(&out[0], &out[1], &out[2], &n) < 0.0 {
            out[2] = -out[2];
        }
        [out[0], out[1], out[2]]
    }
}

/// A linear isometry of R⁴ restricted to S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub m: Mat4,
}

impl Isometry {
    /// Validates orthogonality of the matrix.
    pub fn new(m: Mat4) -> Result<Self> {
        let r = (m.transpose() * m - Mat4::identity()).abs().max();
        if r > 1e-10 {
            return Err(S3Error::NotOrthonormal(r));
        }
        Ok(Self { m })
    }

    /// The identity map.
    pub fn identity() -> Self {
        Self { m: Mat4::identity() }
    }

    /// Image of a vector.
    #[inline]
    pub fn apply(&self, x: &Vec4) -> Vec4 {
        self.m * x
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { m: self.m * other.m }
    }

    /// Inverse map.
    pub fn inverse(&self) -> Isometry {
        Isometry { m: self.m.transpose() }
    }

    /// Determinant, ±1.
    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// ‖MᵀM − I‖∞.
    pub fn orthogonality_residual(&self) -> f64 {
        (self.m.transpose() * self.m - Mat4::identity()).abs().max()
    }

    /// Maximum entrywise distance to another isometry.
    pub fn distance(&self, other: &Isometry) -> f64 {
        (self.m - other.m).abs().max()
    }
}

/// Reflection across a totally geodesic sphere, `I − 2nnᵀ`.
pub fn reflect(s: &GeodesicSphere) -> Isometry {
    let n = s.normal;
    Isometry {
        m: Mat4::identity() - n * n.transpose() * 2.0,
    }
}

/// Rotation of angle `theta` about a great circle.
///
/// The circle is fixed pointwise and the orthogonal plane `{q, w}` of the
/// completed positive frame is rotated from `q` towards `w`.
pub fn rotate_about_circle(c: &GreatCircle, theta: f64) -> Isometry {
    let [p, v, q, w] = c.complete_frame();
    let (s, co) = theta.sin_cos();
    let m = p * p.transpose()
        + v * v.transpose()
        + (q * q.transpose() + w * w.transpose()) * co
        + (w * q.transpose() - q * w.transpose()) * s;
    Isometry { m }
}

/// π-rotation about the great circle through `p` with direction `v`: identity on span{p,v}, minus identity on its complement.
pub fn half_turn(c: &GreatCircle) -> Isometry {
    let proj = c.p * c.p.transpose() + c.v * c.v.transpose();
    Isometry {
        m: proj * 2.0 - Mat4::identity(),
    }
}

/// Killing field K(x) = ⟨q,x⟩w − ⟨w,x⟩q of the rotation about Γ_{p,v}.
pub fn killing_eval(frame: &[Vec4; 4], x: &Vec4) -> Vec4 {
    let [_, _, q, w] = frame;
    w * q.dot(x) - q * w.dot(x)
}

/// Positively oriented frame with a helicoid pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelicoidFrame {
    pub p: Vec4,
    pub v: Vec4,
    pub q: Vec4,
    pub w: Vec4,
    pub pitch: f64,
}

impl HelicoidFrame {
    /// Validates orthonormality and positive orientation.
    pub fn new(p: Vec4, v: Vec4, q: Vec4, w: Vec4, pitch: f64) -> Result<Self> {
        let m = Mat4::from_columns(&[p, v, q, w]);
        let r = (m.transpose() * m - Mat4::identity()).abs().max();
        if r > 1e-10 || m.determinant() < 0.0 {
            return Err(S3Error::NotOrthonormal(r));
        }
        Ok(Self { p, v, q, w, pitch })
    }

    /// The axis Γ_{p,v}.
    pub fn axis(&self) -> GreatCircle {
        GreatCircle::new_unchecked(self.p, self.v)
    }
}

/// Helicoid point H(s,t) = cos s · Γ_{p,v}(t) + sin s · Γ_{q,w}(λt).
pub fn helicoid_point(h: &HelicoidFrame, s: f64, t: f64) -> Vec4 {
    let axis = GreatCircle::new_unchecked(h.p, h.v).point(t);
    let polar = GreatCircle::new_unchecked(h.q, h.w).point(h.pitch * t);
    axis * s.cos() + polar * s.sin()
}

/// Stereographic projection from −k: (x₁,x₂,x₃)/(1+x₄).
pub fn stereo(p: &Vec4) -> Result<Vector3<f64>> {
    if (p + K).norm() < ANTIPODAL_EPS {
        return Err(S3Error::PoleSingularity);
    }
    let d = 1.0 + p[3];
    Ok(Vector3::new(p[0] / d, p[1] / d, p[2] / d))
}

/// Inverse stereographic projection onto S³.
pub fn stereo_inverse(y: &Vector3<f64>) -> Vec4 {
    let r2 = y.norm_squared();
    let d = 1.0 + r2;
    Vector4::new(2.0 * y[0] / d, 2.0 * y[1] / d, 2.0 * y[2] / d, (1.0 - r2) / d)
}

/// Interior angle at `a` of the geodesic triangle `a, b, c`.
pub fn vertex_angle(a: &Vec4, b: &Vec4, c: &Vec4) -> f64 {
    let tb = tangent_part(a, b);
    let tc = tangent_part(a, c);
    let cr = (tb.norm_squared() * tc.norm_squared() - tb.dot(&tc).powi(2))
        .max(0.0)
        .sqrt();
    cr.atan2(tb.dot(&tc))
}

/// Area of the geodesic triangle `p1, p2, p3` on a totally geodesic sphere (Girard excess).
pub fn triangle_area(p1: &Vec4, p2: &Vec4, p3: &Vec4, sphere: &GeodesicSphere) -> Result<f64> {
    for p in [p1, p2, p3] {
        let r = sphere.side(p).abs();
        if r > 1e-8 {
            return Err(S3Error::OffSphere(r));
        }
    }
    let vol = det4(p1, p2, p3, &sphere.normal).abs();
    if vol < COLLINEAR_EPS {
        return Err(S3Error::DegenerateTriangle(vol));
    }
    Ok(triangle_excess(p1, p2, p3))
}

/// Excess of the geodesic triangle spanned by three unit vectors in a common 3-space.
///
/// Evaluated with the half-angle tangent form so that thin and tiny triangles keep relative precision.
pub fn triangle_excess(p1: &Vec4, p2: &Vec4, p3: &Vec4) -> f64 {
    let vol = cross_norm3(p1, p2, p3);
    let den = 1.0 + p1.dot(p2) + p2.dot(p3) + p3.dot(p1);
    2.0 * vol.atan2(den)
}

/// Unsigned 3-volume of the parallelepiped spanned by three 4-vectors.
fn cross_norm3(a: &Vec4, b: &Vec4, c: &Vec4) -> f64 {
    cross3(a, b, c).norm()
}

/// Unoriented angle between two spheres, `arccos|⟨n₁,n₂⟩|` ∈ [0, π/2].
pub fn sphere_angle(s1: &GeodesicSphere, s2: &GeodesicSphere) -> Result<f64> {
    let c = s1.normal.dot(&s2.normal).abs();
    if c > 1.0 - UNIT_TOL {
        return Err(S3Error::IdenticalSpheres);
    }
    Ok(clamp_unit(c).acos())
}

/// Oriented angle between co-oriented spheres, `arccos⟨n₁,n₂⟩` ∈ [0, π].
///
/// The caller fixes the co-orientation by the sign of the supplied normals.
pub fn sphere_angle_oriented(n1: &Vec4, n2: &Vec4) -> Result<f64> {
    let c = n1.dot(n2);
    if c.abs() > 1.0 - UNIT_TOL {
        return Err(S3Error::IdenticalSpheres);
    }
    Ok(clamp_unit(c).acos())
}

/// Chordal area of the flat triangle with the given 4-space vertices.
#[inline]
pub fn chordal_area(a: &Vec4, b: &Vec4, c: &Vec4) -> f64 {
    let u = b - a;
    let v = c - a;
    0.5 * (u.norm_squared() * v.norm_squared() - u.dot(&v).powi(2))
        .max(0.0)
        .sqrt()
}
