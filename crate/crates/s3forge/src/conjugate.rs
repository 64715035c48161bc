//! Boundary contour of the conjugate disk.
//!
//! The conjugate of a straight boundary edge is a planar curve whose
//! geodesic curvature inside its totally geodesic two-sphere equals the
//! derivative of the normal rotation ρ along the edge. Each conjugate arc is
//! recovered by integrating the spherical Frenet equations
//! δ′ = t, t′ = κ n − δ, n′ = −κ t, where n is the conjugate surface normal.

use crate::pentagon::{Pentagon, PentagonKind};
use crate::plateau::{
    edge_frame, gamma_length, rho_profile, EdgeTag, MinimalDisk, PlateauError, RhoProfile, SmoothingSpline,
};
use crate::s3core::{cross3, det4, dist, normalize, triangle_excess, GeodesicSphere, Vec4, E, I, J, K, V_PLUS};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Largest admissible decrease of a ρ profile between samples.
pub const MONOTONE_TOL: f64 = 5e-3;
/// Largest admissible frame drift per unit length during integration.
pub const DRIFT_TOL: f64 = 1e-10;
/// Upper bound on the integration step.
pub const MAX_STEP: f64 = 1e-3;

/// Errors raised while reconstructing the conjugate contour.
#[derive(Debug, Error)]
pub enum ConjugateError {
    #[error("rho profile decreases by {0:.3e}, beyond sampling noise")]
    NonMonotoneProfile(f64),
    #[error("frame drift {0:.3e} per unit length exceeds tolerance")]
    FrameDrift(f64),
    #[error("initial frame is not orthonormal and tangent to the sphere (residual {0:.3e})")]
    InvalidFrame(f64),
    #[error("neither curvature sign makes the conjugate edge enter x3 > 0 near k")]
    SignAmbiguity,
    #[error("angle a = {0} lies outside (0, pi/2)")]
    OutOfQuarter(f64),
    #[error("region bounded by the conjugate edge is not convex")]
    NonConvexRegion,
    #[error("conjugate contour needs an (l, omega) pentagon")]
    UnsupportedPentagon,
    #[error(transparent)]
    Plateau(#[from] PlateauError),
}

pub type Result<T> = std::result::Result<T, ConjugateError>;

/// Options of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateConfig {
    /// Fixed smoothing weight of the ρ spline; chosen by GCV when absent.
    pub smoothing: Option<f64>,
    /// Number of curvature samples per edge.
    pub samples: usize,
}

impl Default for ConjugateConfig {
    fn default() -> Self {
        Self {
            smoothing: None,
            samples: 400,
        }
    }
}

/// Curvature κ* = ρ′ sampled on a uniform grid over an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    pub edge: EdgeTag,
    pub length: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Whether every sample is strictly positive.
    pub positive: bool,
    pub spline: SmoothingSpline,
}

impl CurvatureProfile {
    /// Linearly interpolated curvature at arc length `s`.
    pub fn at(&self, s: f64) -> f64 {
        let n = self.grid.len();
        let h = self.length / (n - 1) as f64;
        let x = (s / h).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// Trapezoidal integral of the samples.
    pub fn integral(&self) -> f64 {
        let h = self.length / (self.grid.len() - 1) as f64;
        self.values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum()
    }
}

/// Curvature of the conjugate edge from a ρ profile.
///
/// κ* is the centred difference of a smoothing spline of ρ. A constant
/// correction makes the trapezoidal integral of κ* equal the spline's total
/// increase over the edge.
pub fn kappa_from_rho(profile: &RhoProfile, cfg: &ConjugateConfig) -> Result<CurvatureProfile> {
    let dec = profile.max_decrease();
    if dec > MONOTONE_TOL {
        return Err(ConjugateError::NonMonotoneProfile(dec));
    }
    let (t, r): (Vec<f64>, Vec<f64>) = profile.samples.iter().cloned().unzip();
    let spline = match cfg.smoothing {
        Some(lam) => SmoothingSpline::fit(&t, &r, lam),
        None => SmoothingSpline::fit_gcv(&t, &r),
    };
    Ok(curvature_from_spline(
        profile.edge,
        profile.length,
        spline,
        cfg.samples.max(8),
    ))
}

/// Samples the centred-difference derivative of `spline` on `[0, length]`.
pub fn curvature_from_spline(edge: EdgeTag, length: f64, spline: SmoothingSpline, samples: usize) -> CurvatureProfile {
    let n = samples.max(2);
    let h = length / (n - 1) as f64;
    let eps = 1e-4 * length;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let mut values: Vec<f64> = grid
        .iter()
        .map(|&s| (spline.eval(s + eps) - spline.eval(s - eps)) / (2.0 * eps))
        .collect();
    let target = spline.eval(length) - spline.eval(0.0);
    let current: f64 = values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum();
    let shift = (target - current) / length;
    for v in values.iter_mut() {
        *v += shift;
    }
    let positive = values.iter().all(|v| *v > 0.0);
    CurvatureProfile {
        edge,
        length,
        grid,
        values,
        positive,
        spline,
    }
}

/// A sample of an integrated curve with its Frenet frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetSample {
    pub s: f64,
    pub point: Vec4,
    pub tangent: Vec4,
    pub normal: Vec4,
}

/// Integrates the spherical Frenet equations inside a totally geodesic two-sphere.
///
/// Classical fourth-order Runge–Kutta with step `min(MAX_STEP, length/200)`;
/// the frame is re-orthonormalized after every step.
pub fn integrate_frenet<F: Fn(f64) -> f64>(
    kappa: F,
    length: f64,
    sphere: &GeodesicSphere,
    start: &Vec4,
    tangent: &Vec4,
    normal: &Vec4,
) -> Result<Vec<FrenetSample>> {
    let nu = sphere.normal;
    let frame = [*start, *tangent, *normal];
    let mut resid: f64 = 0.0;
    for a in 0..3 {
        resid = resid.max(frame[a].dot(&nu).abs());
        for b in 0..3 {
            let target = if a == b { 1.0 } else { 0.0 };
            resid = resid.max((frame[a].dot(&frame[b]) - target).abs());
        }
    }
    if resid > 1e-9 {
        return Err(ConjugateError::InvalidFrame(resid));
    }
    let steps = ((length / MAX_STEP.min(length / 200.0)).ceil() as usize).max(1);
    let h = length / steps as f64;
    let (mut p, mut t, mut n) = (*start, *tangent, *normal);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(FrenetSample {
        s: 0.0,
        point: p,
        tangent: t,
        normal: n,
    });
    let rhs = |s: f64, p: &Vec4, t: &Vec4, n: &Vec4| {
        let k = kappa(s);
        (*t, n * k - p, -t * k)
    };
    let mut drift = 0.0;
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = rhs(s, &p, &t, &n);
        let k2 = rhs(
            s + 0.5 * h,
            &(p + k1.0 * (0.5 * h)),
            &(t + k1.1 * (0.5 * h)),
            &(n + k1.2 * (0.5 * h)),
        );
        let k3 = rhs(
            s + 0.5 * h,
            &(p + k2.0 * (0.5 * h)),
            &(t + k2.1 * (0.5 * h)),
            &(n + k2.2 * (0.5 * h)),
        );
        let k4 = rhs(s + h, &(p + k3.0 * h), &(t + k3.1 * h), &(n + k3.2 * h));
        p += (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
        t += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
        n += (k1.2 + k2.2 * 2.0 + k3.2 * 2.0 + k4.2) * (h / 6.0);
        let step_drift = [
            p.norm() - 1.0,
            t.norm() - 1.0,
            n.norm() - 1.0,
            p.dot(&t),
            p.dot(&n),
            t.dot(&n),
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
        drift += step_drift;
        p = normalize(p - nu * nu.dot(&p));
        t -= p * p.dot(&t) + nu * nu.dot(&t);
        t = normalize(t);
        n -= p * p.dot(&n) + t * t.dot(&n) + nu * nu.dot(&n);
        n = normalize(n);
        out.push(FrenetSample {
            s: s + h,
            point: p,
            tangent: t,
            normal: n,
        });
    }
    if length > 0.0 && drift / length > DRIFT_TOL {
        return Err(ConjugateError::FrameDrift(drift / length));
    }
    Ok(out)
}

/// One reconstructed conjugate arc.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateArc {
    pub edge: EdgeTag,
    pub sphere: GeodesicSphere,
    pub samples: Vec<FrenetSample>,
    pub kappa: CurvatureProfile,
}

impl ConjugateArc {
    /// Polyline length of the arc.
    pub fn length(&self) -> f64 {
        polyline_length(&self.points())
    }

    /// Polyline length of the normal image N* along the arc.
    pub fn normal_length(&self) -> f64 {
        let n: Vec<Vec4> = self.samples.iter().map(|s| s.normal).collect();
        polyline_length(&n)
    }

    /// Sample points.
    pub fn points(&self) -> Vec<Vec4> {
        self.samples.iter().map(|s| s.point).collect()
    }

    /// Final sample.
    pub fn last(&self) -> &FrenetSample {
        self.samples.last().expect("integrated arcs are nonempty")
    }
}

/// Conjugate boundary data of a solved disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateContour {
    pub delta_star: ConjugateArc,
    pub beta_star: ConjugateArc,
    pub alpha_star: ConjugateArc,
    pub z_star: Vec4,
    pub y_star: Vec4,
    /// End of the half α+*, the image of x.
    pub x_star: Vec4,
    /// Distance from k to z*.
    pub a: f64,
    pub theta: f64,
    /// Sign relating κ* to ρ′ chosen by the entry test at k.
    pub kappa_sign: f64,
    /// Orientation of the conjugate disk relative to its boundary.
    pub orientation: f64,
    /// |dist(k, x*) − L|: the image of the mirror chain is a geodesic of length L.
    pub closure_gap: Option<f64>,
}

/// Sum of distances between consecutive points.
pub fn polyline_length(points: &[Vec4]) -> f64 {
    points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// (Θ, a) of a point z*: Θ = atan2(⟨z*, e⟩, ⟨z*, j⟩), a = arccos⟨z*, k⟩.
pub fn theta_of(z_star: &Vec4) -> Result<(f64, f64)> {
    let a = dist(z_star, &K);
    if !(a > 0.0 && a < FRAC_PI_2) {
        return Err(ConjugateError::OutOfQuarter(a));
    }
    Ok((z_star.dot(&E).atan2(z_star.dot(&J)), a))
}

/// Sign of det(p, t, a, b): orientation of an edge frame relative to the edge.
fn frame_orientation(p: &Vec4, t: &Vec4, a: &Vec4, b: &Vec4) -> f64 {
    det4(p, t, a, b).signum()
}

/// Reconstructs δ+*, β+* and the half α+* of the conjugate disk.
///
/// δ+* starts at k in S₂ with tangent e and normal −j; the curvature sign
/// is the one for which the arc enters x3 > 0. At each corner the next arc
/// leaves along the inward conormal of the previous one. The disk
/// orientation is the one for which the endpoint x* lies at distance L from
/// k, since the mirror chain becomes a geodesic of the conjugate.
pub fn reconstruct_contour(disk: &MinimalDisk, pent: &Pentagon, cfg: &ConjugateConfig) -> Result<ConjugateContour> {
    let l = match pent.kind {
        PentagonKind::LOmega(p) => p.l,
        PentagonKind::Sigma(_) => return Err(ConjugateError::UnsupportedPentagon),
    };
    let mesh = disk.mesh();
    let kd = kappa_from_rho(&rho_profile(mesh, pent, EdgeTag::DeltaPlus)?, cfg)?;
    let kb = kappa_from_rho(&rho_profile(mesh, pent, EdgeTag::BetaPlus)?, cfg)?;
    let ka = kappa_from_rho(&rho_profile(mesh, pent, EdgeTag::Alpha)?, cfg)?;
    let gamma = gamma_length(disk).ok().map(|g| g.1);

    // Orientation of each edge frame (a, b) relative to the edge direction.
    let orient = |edge: EdgeTag, p: &Vec4, t: &Vec4| -> Result<f64> {
        let (a, b) = edge_frame(pent, edge)?;
        Ok(frame_orientation(p, t, &a, &b))
    };
    let od = orient(EdgeTag::DeltaPlus, &K, &V_PLUS)?;
    let ob = orient(EdgeTag::BetaPlus, &pent.z_plus, &pent.beta_plus.tangent_at(0.0))?;
    let oa = orient(EdgeTag::Alpha, &pent.y_plus, &pent.alpha.tangent_at(0.0))?;

    let s2 = GeodesicSphere::s2();
    let delta_for = |sign: f64| integrate_frenet(|s| sign * kd.at(s), l, &s2, &K, &E, &-J);
    let probe = |arc: &[FrenetSample]| {
        let window: Vec<f64> = arc
            .iter()
            .filter(|x| x.s > 0.0 && x.s <= 0.25 * l)
            .map(|x| x.point[2])
            .collect();
        window.iter().sum::<f64>() / window.len().max(1) as f64
    };
    let plus = delta_for(1.0)?;
    let m = probe(&plus);
    if m.abs() < 1e-12 {
        return Err(ConjugateError::SignAmbiguity);
    }
    let kappa_sign = if m > 0.0 { 1.0 } else { -1.0 };
    let dsamples = if kappa_sign > 0.0 { plus } else { delta_for(-1.0)? };
    let dend = *dsamples.last().expect("nonempty");
    let z_star = dend.point;
    let (theta, a) = theta_of(&z_star)?;

    let next_arc = |prev: &FrenetSample,
                    orientation: f64,
                    kappa: &CurvatureProfile,
                    factor: f64|
     -> Result<(GeodesicSphere, Vec<FrenetSample>)> {
        let t0 = normalize(cross3(&prev.point, &prev.tangent, &prev.normal) * orientation);
        let sphere = GeodesicSphere::from_normal(cross3(&prev.point, &t0, &prev.normal));
        let sign = kappa_sign * factor;
        let samples = integrate_frenet(
            |s| sign * kappa.at(s),
            kappa.length,
            &sphere,
            &prev.point,
            &t0,
            &prev.normal,
        )?;
        Ok((sphere, samples))
    };

    let mut best: Option<(f64, ConjugateContour)> = None;
    for orientation in [1.0, -1.0] {
        let (bsphere, bsamples) = next_arc(&dend, orientation, &kb, ob * od)?;
        let bend = *bsamples.last().expect("nonempty");
        let (asphere, asamples) = next_arc(&bend, orientation, &ka, oa * od)?;
        let x_star = asamples.last().expect("nonempty").point;
        let gap = gamma.map(|g| (dist(&K, &x_star) - g).abs());
        let contour = ConjugateContour {
            delta_star: ConjugateArc {
                edge: EdgeTag::DeltaPlus,
                sphere: s2,
                samples: dsamples.clone(),
                kappa: kd.clone(),
            },
            beta_star: ConjugateArc {
                edge: EdgeTag::BetaPlus,
                sphere: bsphere,
                samples: bsamples,
                kappa: kb.clone(),
            },
            alpha_star: ConjugateArc {
                edge: EdgeTag::Alpha,
                sphere: asphere,
                samples: asamples,
                kappa: ka.clone(),
            },
            z_star,
            y_star: bend.point,
            x_star,
            a,
            theta,
            kappa_sign,
            orientation,
            closure_gap: gap,
        };
        let score = gap.unwrap_or(0.0);
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, contour));
        }
    }
    Ok(best.expect("two orientations tried").1)
}

/// Θ from Gauss–Bonnet: Θ = ω − Area(D), D bounded by δ+* and the segment [k, z*].
///
/// The area is the sum of Girard areas of the fan from k.
pub fn gauss_bonnet_theta(contour: &ConjugateContour, omega: f64) -> Result<f64> {
    Ok(omega - region_area(&contour.delta_star.points(), &contour.delta_star.sphere)?)
}

/// Area of the region bounded by a convex polyline and the chord closing it, by a fan from its first point.
pub fn region_area(points: &[Vec4], sphere: &GeodesicSphere) -> Result<f64> {
    let apex = points[0];
    let mut area = 0.0;
    let mut orient = 0.0;
    for w in points[1..].windows(2) {
        let d = det4(&apex, &w[0], &w[1], &sphere.normal);
        let scale = (w[0] - w[1]).norm() * (w[0] - apex).norm();
        if d.abs() > 1e-9 * scale {
            if orient == 0.0 {
                orient = d.signum();
            } else if d.signum() != orient {
                return Err(ConjugateError::NonConvexRegion);
            }
        }
        area += triangle_excess(&apex, &w[0], &w[1]);
    }
    Ok(area)
}

/// Outcome of the curve validators.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveReport {
    /// Pairs of non-adjacent polyline segments that cross.
    pub self_intersections: usize,
    /// Sample points whose tangent great circle is recrossed by the curve.
    pub tangent_violations: usize,
    pub length: f64,
    pub normal_length: Option<f64>,
}

impl CurveReport {
    /// Embedded and locally convex.
    pub fn embedded(&self) -> bool {
        self.self_intersections == 0
    }

    /// Conditions of the convex embedding criterion: no crossing, length below π, normal-image length below π.
    pub fn convex_embedding(&self) -> bool {
        self.embedded() && self.tangent_violations == 0 && self.length < PI && self.normal_length.is_none_or(|n| n < PI)
    }
}

/// Coordinates of points of a two-sphere of S³ in an orthonormal basis of its 3-space.
pub fn sphere_coords(points: &[Vec4], sphere: &GeodesicSphere) -> Vec<[f64; 3]> {
    let b = sphere.basis();
    points
        .iter()
        .map(|p| [p.dot(&b[0]), p.dot(&b[1]), p.dot(&b[2])])
        .collect()
}

fn c3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn d3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Whether the minor great-circle arcs AB and CD of the unit 2-sphere cross.
pub fn arcs_cross(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3]) -> bool {
    let n1 = c3(a, b);
    let n2 = c3(c, d);
    // C and D on opposite sides of plane AB, A and B on opposite sides of plane CD.
    let (sc, sd) = (d3(&n1, c), d3(&n1, d));
    let (sa, sb) = (d3(&n2, a), d3(&n2, b));
    if sc * sd >= 0.0 || sa * sb >= 0.0 {
        return false;
    }
    // Exclude the antipodal crossing: the intersection direction must lie on both arcs.
    let mut x = c3(&n1, &n2);
    let mid = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    if d3(&x, &mid) < 0.0 {
        x = [-x[0], -x[1], -x[2]];
    }
    let mid2 = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
    d3(&x, &mid2) > 0.0
}

/// Number of crossing pairs among non-adjacent segments of a polyline on a two-sphere.
pub fn self_intersections(points: &[Vec4], sphere: &GeodesicSphere, closed: bool) -> usize {
    let q = sphere_coords(points, sphere);
    let n = q.len();
    let segs = if closed { n } else { n.saturating_sub(1) };
    let mut count = 0;
    for i in 0..segs {
        let (a, b) = (&q[i], &q[(i + 1) % n]);
        for j in (i + 2)..segs {
            if closed && i == 0 && j == segs - 1 {
                continue;
            }
            if arcs_cross(a, b, &q[j], &q[(j + 1) % n]) {
                count += 1;
            }
        }
    }
    count
}

/// Runs the embeddedness and convexity checks on a polyline lying on `sphere`.
///
/// With normals, point i passes the tangent test when all other points lie
/// on the side of the tangent great circle toward which the normal points,
/// or all on the other side.
pub fn curve_validators(points: &[Vec4], normals: Option<&[Vec4]>, sphere: &GeodesicSphere) -> CurveReport {
    let stride = (points.len() / 400).max(1);
    let thin: Vec<Vec4> = points.iter().step_by(stride).cloned().collect();
    let mut tangent_violations = 0;
    if let Some(ns) = normals {
        for (i, n) in ns.iter().enumerate().step_by(stride) {
            let scale = 1e-9;
            let mut pos = false;
            let mut neg = false;
            for (j, q) in points.iter().enumerate() {
                if i.abs_diff(j) <= 1 {
                    continue;
                }
                let v = q.dot(n);
                pos |= v > scale;
                neg |= v < -scale;
            }
            if pos && neg {
                tangent_violations += 1;
            }
        }
    }
    CurveReport {
        self_intersections: self_intersections(&thin, sphere, false),
        tangent_violations,
        length: polyline_length(points),
        normal_length: normals.map(polyline_length),
    }
}

/// Perimeter of a closed spherical polygon.
pub fn polygon_perimeter(poly: &[Vec4]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| dist(&poly[i], &poly[(i + 1) % n])).sum()
}

/// Perimeter of a closed polygon on a two-sphere by the Crofton formula.
///
/// Length = π · E[number of crossings with a random great circle], with the
/// expectation taken over `directions` Fibonacci-lattice poles.
pub fn crofton_perimeter(poly: &[Vec4], sphere: &GeodesicSphere, directions: usize) -> f64 {
    let q = sphere_coords(poly, sphere);
    let n = q.len();
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut crossings = 0usize;
    for k in 0..directions {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / directions as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * k as f64;
        let pole = [r * phi.cos(), r * phi.sin(), z];
        for i in 0..n {
            let (a, b) = (d3(&pole, &q[i]), d3(&pole, &q[(i + 1) % n]));
            if (a > 0.0) != (b > 0.0) {
                crossings += 1;
            }
        }
    }
    PI * crossings as f64 / directions as f64
}

/// Whether every vertex of `inner` lies in the closed convex polygon `outer` on `sphere`.
pub fn polygon_contains(outer: &[Vec4], inner: &[Vec4], sphere: &GeodesicSphere) -> bool {
    let o = sphere_coords(outer, sphere);
    let q = sphere_coords(inner, sphere);
    let n = o.len();
    let centre = o.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
    (0..n).all(|i| {
        let nrm = c3(&o[i], &o[(i + 1) % n]);
        let side = d3(&nrm, &centre).signum();
        q.iter().all(|p| d3(&nrm, p) * side >= -1e-12)
    })
}

/// Perimeter monotonicity for nested convex polygons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedPerimeters {
    pub inner: f64,
    pub outer: f64,
    pub nested: bool,
}

impl NestedPerimeters {
    /// Nested and the inner perimeter does not exceed the outer one.
    pub fn monotone(&self) -> bool {
        self.nested && self.inner <= self.outer
    }
}

/// Compares perimeters of a convex polygon and a convex polygon claimed to contain it.
pub fn nested_perimeters(inner: &[Vec4], outer: &[Vec4], sphere: &GeodesicSphere) -> NestedPerimeters {
    NestedPerimeters {
        inner: polygon_perimeter(inner),
        outer: polygon_perimeter(outer),
        nested: polygon_contains(outer, inner, sphere),
    }
}

/// Lower bound of the spherical isoperimetric inequality at a closing candidate: l² + (π − ω)² − π².
pub fn isoperimetric_margin(l: f64, omega: f64) -> f64 {
    l * l + (PI - omega).powi(2) - PI * PI
}

/// The great sphere S₂ used for δ+*.
pub fn mirror_sphere() -> GeodesicSphere {
    GeodesicSphere::from_normal(I)
}
