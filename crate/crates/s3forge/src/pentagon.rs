//! Right-angled geodesic pentagons P_{l,ω} and P_σ with their closed-form data.
//!
//! A pentagon has vertices `k, z±, y±` and edges `δ± = [k, z±]`,
//! `β± = [z±, y±]` and `α = [y+, y−]`, with midpoint `x` of `α` on S₂.
//! The reflection R₂ in S₂ swaps the `+` and `−` halves.

use crate::s3core::{
    clamp_unit, cross3, dist, normalize, tangent_part, GeodesicSphere, GreatCircle, Vec4, E, I, J, K, V_MINUS, V_PLUS,
};
use nalgebra::Vector4;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use thiserror::Error;

/// Guard band used when classifying parameters against region boundaries.
pub const REGION_GUARD: f64 = 1e-12;
/// Membership tolerance of polyhedra.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Errors raised by pentagon constructions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PentagonError {
    #[error("invalid pentagon parameters: {0}")]
    InvalidParams(String),
    #[error("value outside the domain: {0}")]
    OutOfDomain(String),
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, PentagonError>;

/// Region of the (l, ω) parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Open diagonal l + ω = π/2 inside C1.
    Diag,
    /// l + ω > π/2 inside C1.
    Tplus,
    /// l + ω < π/2 inside C1.
    Tminus,
    /// (π/2, π) × (−π/2, 0).
    C2,
    /// On ω = 0 or l = π/2, excluding (π/2, 0).
    AxisLine,
    /// Anything else, including the point (π/2, 0).
    Excluded,
}

impl Region {
    /// Whether the region lies in the open square C1 = (0, π/2)².
    pub fn in_c1(self) -> bool {
        matches!(self, Region::Diag | Region::Tplus | Region::Tminus)
    }
}

/// Classifies (l, ω).
pub fn classify(l: f64, omega: f64) -> Region {
    let g = REGION_GUARD;
    let on_l_axis = (l - FRAC_PI_2).abs() <= g;
    let on_w_axis = omega.abs() <= g;
    if on_l_axis && on_w_axis {
        return Region::Excluded;
    }
    if !(l > g && l < PI - g && omega > -FRAC_PI_2 + g && omega < FRAC_PI_2 - g) {
        return Region::Excluded;
    }
    if on_l_axis || on_w_axis {
        return Region::AxisLine;
    }
    if l < FRAC_PI_2 && omega > 0.0 {
        let s = l + omega - FRAC_PI_2;
        if s.abs() <= g {
            Region::Diag
        } else if s > 0.0 {
            Region::Tplus
        } else {
            Region::Tminus
        }
    } else if l > FRAC_PI_2 && omega < 0.0 {
        Region::C2
    } else {
        Region::Excluded
    }
}

/// Parameters (l, ω) of the two-parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PentagonParams {
    pub l: f64,
    pub omega: f64,
    pub region: Region,
}

impl PentagonParams {
    /// Validates and classifies. Only the point (π/2, 0) and out-of-range values are rejected.
    pub fn new(l: f64, omega: f64) -> Result<Self> {
        if !(l.is_finite() && omega.is_finite()) {
            return Err(PentagonError::InvalidParams("non-finite value".into()));
        }
        if !(l > 0.0 && l < PI) || !(omega > -FRAC_PI_2 && omega < FRAC_PI_2) {
            return Err(PentagonError::InvalidParams(format!(
                "(l, omega) = ({l}, {omega}) outside (0, pi) x (-pi/2, pi/2)"
            )));
        }
        if (l - FRAC_PI_2).abs() <= REGION_GUARD && omega.abs() <= REGION_GUARD {
            return Err(PentagonError::InvalidParams(
                "(pi/2, 0) requires the sigma family".into(),
            ));
        }
        Ok(Self {
            l,
            omega,
            region: classify(l, omega),
        })
    }
}

/// Parameter σ of the degenerate family P_σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaParams {
    pub sigma: f64,
}

impl SigmaParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&sigma) {
            return Err(PentagonError::InvalidParams(format!(
                "sigma = {sigma} outside [-pi/2, pi/2]"
            )));
        }
        Ok(Self { sigma })
    }
}

/// Either member of the pentagon families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PentagonKind {
    LOmega(PentagonParams),
    Sigma(SigmaParams),
}

/// An arc of a great circle over a parameter interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicArc {
    pub circle: GreatCircle,
    pub t0: f64,
    pub t1: f64,
    pub start: Vec4,
    pub end: Vec4,
}

impl GeodesicArc {
    /// Arc of `circle` over `[t0, t1]`.
    pub fn new(circle: GreatCircle, t0: f64, t1: f64) -> Self {
        Self {
            circle,
            t0,
            t1,
            start: circle.point(t0),
            end: circle.point(t1),
        }
    }

    /// Arc length.
    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Point at arc length `s` from the start.
    pub fn at(&self, s: f64) -> Vec4 {
        self.circle.point(self.t0 + s)
    }

    /// Unit tangent at arc length `s` from the start.
    pub fn tangent_at(&self, s: f64) -> Vec4 {
        self.circle.tangent(self.t0 + s)
    }

    /// `m + 1` points at uniform arc length.
    pub fn sample(&self, m: usize) -> Vec<Vec4> {
        (0..=m).map(|i| self.at(self.length() * i as f64 / m as f64)).collect()
    }

    /// The arc traversed backwards.
    pub fn reversed(&self) -> Self {
        let c = self.circle;
        // Γ_{p,v}(t1 − s) = Γ_{p',v'}(s) with p' = Γ(t1), v' = −Γ'(t1).
        let circle = GreatCircle::new_unchecked(c.point(self.t1), -c.tangent(self.t1));
        GeodesicArc::new(circle, 0.0, self.length())
    }
}

/// z± = (sin l/√2, ±sin l/√2, 0, cos l).
pub fn z_pm(l: f64, sign: f64) -> Vec4 {
    let s = l.sin() * std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(s, sign * s, 0.0, l.cos())
}

/// Unit tangent u± of β± at z±.
pub fn u_pm(omega: f64, sign: f64) -> Vec4 {
    let c = omega.cos() * std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(-c, sign * c, omega.sin(), 0.0)
}

/// Unit tangent w± = δ±′(l) of δ± at z±.
pub fn w_pm(l: f64, sign: f64) -> Vec4 {
    let c = l.cos() * std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(c, sign * c, 0.0, -l.sin())
}

/// Edge δ± = [k, z±] on Γ_{k, v±}.
pub fn edge_delta(l: f64, sign: f64) -> GeodesicArc {
    let v = if sign > 0.0 { V_PLUS } else { V_MINUS };
    GeodesicArc::new(GreatCircle::new_unchecked(K, v), 0.0, l)
}

/// β±(r) = cos r · z± + sin r · u±.
pub fn beta_point(l: f64, omega: f64, sign: f64, r: f64) -> Vec4 {
    z_pm(l, sign) * r.cos() + u_pm(omega, sign) * r.sin()
}

/// The length r̄ = arccot(sin l / cos ω) of β±.
pub fn r_bar(l: f64, omega: f64) -> f64 {
    omega.cos().atan2(l.sin())
}

/// h(r) = ⟨β+(r), β−(r)⟩.
pub fn h_of_r(l: f64, omega: f64, r: f64) -> f64 {
    beta_point(l, omega, 1.0, r).dot(&beta_point(l, omega, -1.0, r))
}

/// Residual of the orthogonality equation satisfied by r̄.
pub fn r_bar_residual(l: f64, omega: f64, r: f64) -> f64 {
    (2.0 * r).sin() * ((2.0 * l).cos() + (2.0 * omega).cos()) + 4.0 * l.sin() * omega.cos() * (2.0 * r).cos()
}

/// The closed-form value h(r̄) = (cos 2l − cos 2ω)/2.
pub fn h_bar(l: f64, omega: f64) -> f64 {
    0.5 * ((2.0 * l).cos() - (2.0 * omega).cos())
}

/// Vertices y± = β±(r̄).
pub fn y_pm(l: f64, omega: f64) -> (Vec4, Vec4) {
    let r = r_bar(l, omega);
    (beta_point(l, omega, 1.0, r), beta_point(l, omega, -1.0, r))
}

/// Edge α from y+ to y− with midpoint x on S₂.
///
/// For l ≤ π/2 this is the minor arc, otherwise its complement on the same great circle.
pub fn alpha_arc(l: f64, omega: f64) -> GeodesicArc {
    let (yp, ym) = y_pm(l, omega);
    let u = normalize(tangent_part(&yp, &ym));
    let theta = dist(&yp, &ym);
    if l <= FRAC_PI_2 {
        GeodesicArc::new(GreatCircle::new_unchecked(yp, u), 0.0, theta)
    } else {
        GeodesicArc::new(GreatCircle::new_unchecked(yp, -u), 0.0, 2.0 * PI - theta)
    }
}

/// Half-length s̄ of α.
pub fn s_bar(l: f64, omega: f64) -> f64 {
    0.5 * alpha_arc(l, omega).length()
}

/// Edge α_σ from i to −i through x_σ = cos σ · k + sin σ · j.
pub fn alpha_sigma(sigma: f64) -> GeodesicArc {
    GeodesicArc::new(GreatCircle::new_unchecked(I, x_sigma(sigma)), 0.0, PI)
}

/// x_σ = Γ_{k,j}(σ).
pub fn x_sigma(sigma: f64) -> Vec4 {
    K * sigma.cos() + J * sigma.sin()
}

/// Normalizing factor E(l, ω) of the midpoint.
pub fn e_factor(l: f64, omega: f64) -> f64 {
    let (sl, cl) = l.sin_cos();
    let (sw, cw) = omega.sin_cos();
    ((cl * cl + sw * sw) * (sl * sl + cw * cw)).sqrt()
}

/// Midpoint x of α, its normalizing factor E, and dist(x, k).
///
/// The overall sign is sign(sin 2l) off the line l = π/2 and sign(ω) on it.
pub fn midpoint_x(l: f64, omega: f64) -> (Vec4, f64, f64) {
    let e = e_factor(l, omega);
    let s2l = (2.0 * l).sin();
    let sign = if s2l.abs() > 1e-15 {
        s2l.signum()
    } else {
        omega.signum()
    };
    let x = Vector4::new(
        -0.5 * ((2.0 * l).cos() + (2.0 * omega).cos()),
        0.0,
        (2.0 * omega).sin() * std::f64::consts::FRAC_1_SQRT_2,
        s2l * std::f64::consts::FRAC_1_SQRT_2,
    ) * (sign / e);
    let d = dist(&x, &K);
    (x, e, d)
}

/// Unit normals J_x of S²_x = span{i, k, x} and J_α of S²_α = span{x, z+, z−}, and the angle between them.
pub fn face_normals(l: f64, omega: f64) -> (Vec4, Vec4, f64) {
    let jx = normalize(Vector4::new(
        SQRT_2 * (2.0 * omega).sin(),
        0.0,
        (2.0 * l).cos() + (2.0 * omega).cos(),
        0.0,
    ));
    let (sl, cl) = l.sin_cos();
    let (sw, cw) = omega.sin_cos();
    let ja = Vector4::new(SQRT_2 * cl * sw, 0.0, cl * cw, -sl * sw) / (cl * cl + sw * sw).sqrt();
    let angle = clamp_unit(jx.dot(&ja)).acos();
    (jx, ja, angle)
}

/// The oriented angle τ(l, ω) with tan τ = −(cos 2l + cos 2ω)/(√2 sin 2ω).
pub fn tau_of(l: f64, omega: f64) -> f64 {
    (-((2.0 * l).cos() + (2.0 * omega).cos())).atan2(SQRT_2 * (2.0 * omega).sin())
}

/// Lower end arctan(√2 tan τ̄) of the ω-domain of the level curve τ = τ̄.
pub fn level_omega_min(tau: f64) -> f64 {
    (SQRT_2 * tau.tan()).atan()
}

fn level_s(tau: f64, omega: f64) -> f64 {
    let (sw, cw) = omega.sin_cos();
    sw * sw - SQRT_2 * tau.tan() * sw * cw
}

fn check_level_domain(tau: f64, omega: f64) -> Result<()> {
    if !(0.0..FRAC_PI_2).contains(&tau) {
        return Err(PentagonError::OutOfDomain(format!("tau = {tau} outside [0, pi/2)")));
    }
    let lo = level_omega_min(tau);
    if !(omega > lo && omega < FRAC_PI_2) {
        return Err(PentagonError::OutOfDomain(format!(
            "omega = {omega} outside ({lo}, pi/2) for tau = {tau}"
        )));
    }
    Ok(())
}

/// The level curve l_τ̄(ω) = arccos √S(ω) of τ.
pub fn level_l(tau: f64, omega: f64) -> Result<f64> {
    check_level_domain(tau, omega)?;
    Ok(clamp_unit(level_s(tau, omega).max(0.0).sqrt()).acos())
}

/// Derivative of the level curve in ω.
pub fn level_l_derivative(tau: f64, omega: f64) -> Result<f64> {
    let l = level_l(tau, omega)?;
    Ok(-((2.0 * omega).sin() - SQRT_2 * tau.tan() * (2.0 * omega).cos()) / (2.0 * l).sin())
}

/// Closed-form total variation θ_{β+} of the normal along β+.
pub fn theta_beta_closedform(l: f64, omega: f64) -> f64 {
    let (sl, cl) = l.sin_cos();
    let cw = omega.cos();
    let d = cl * cl - cw * cw;
    clamp_unit(cl * ((sl * sl + cw * cw) / (1.0 - d * d)).sqrt()).acos()
}

/// Hexagon relation residual cos l + cos ω − 1.
pub fn hexagon_residual(l: f64, omega: f64) -> f64 {
    l.cos() + omega.cos() - 1.0
}

/// The l solving the hexagon relation for a given ω.
pub fn hexagon_l(omega: f64) -> Result<f64> {
    let c = 1.0 - omega.cos();
    if !(-1.0..=1.0).contains(&c) || !(omega > 0.0 && omega < FRAC_PI_2) {
        return Err(PentagonError::OutOfDomain(format!("omega = {omega} outside (0, pi/2)")));
    }
    Ok(c.acos())
}

/// The spheres Π±,ω through x and z± along the hexagon locus.
pub fn pi_spheres(omega: f64) -> (GeodesicSphere, GeodesicSphere) {
    let (sw, cw) = omega.sin_cos();
    let last = ((2.0 - cw) * cw).sqrt() / SQRT_2;
    let n = |s: f64| GeodesicSphere::from_normal(Vector4::new(cw - 0.5, -s * 0.5, -sw / SQRT_2, last));
    (n(1.0), n(-1.0))
}

/// A geodesic pentagon with its vertices, edges and midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Pentagon {
    pub kind: PentagonKind,
    pub delta_plus: GeodesicArc,
    pub delta_minus: GeodesicArc,
    pub beta_plus: GeodesicArc,
    pub beta_minus: GeodesicArc,
    pub alpha: GeodesicArc,
    pub k: Vec4,
    pub z_plus: Vec4,
    pub z_minus: Vec4,
    pub y_plus: Vec4,
    pub y_minus: Vec4,
    pub x: Vec4,
}

impl Pentagon {
    /// Length of δ±.
    pub fn l(&self) -> f64 {
        self.delta_plus.length()
    }

    /// ω, with ω = 0 for the σ family.
    pub fn omega(&self) -> f64 {
        match self.kind {
            PentagonKind::LOmega(p) => p.omega,
            PentagonKind::Sigma(_) => 0.0,
        }
    }

    /// Length of β±.
    pub fn r_bar(&self) -> f64 {
        self.beta_plus.length()
    }

    /// Half-length of α.
    pub fn s_bar(&self) -> f64 {
        0.5 * self.alpha.length()
    }

    /// Vertices in boundary order k, z+, y+, y−, z−.
    pub fn vertices(&self) -> [Vec4; 5] {
        [self.k, self.z_plus, self.y_plus, self.y_minus, self.z_minus]
    }

    /// Edges in boundary order δ+, β+, α, β− reversed, δ− reversed.
    pub fn boundary_loop(&self) -> [GeodesicArc; 5] {
        [
            self.delta_plus,
            self.beta_plus,
            self.alpha,
            self.beta_minus.reversed(),
            self.delta_minus.reversed(),
        ]
    }

    /// Largest |cos| of the interior angles at the five vertices.
    pub fn right_angle_residual(&self) -> f64 {
        let lp = self.boundary_loop();
        (0..5)
            .map(|i| {
                let a = lp[i];
                let b = lp[(i + 1) % 5];
                a.tangent_at(a.length()).dot(&b.tangent_at(0.0)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest gap between consecutive edge endpoints.
    pub fn closure_residual(&self) -> f64 {
        let lp = self.boundary_loop();
        (0..5)
            .map(|i| (lp[i].end - lp[(i + 1) % 5].start).norm())
            .fold(0.0, f64::max)
    }

    /// Largest distance between R₂ of a vertex and its partner.
    pub fn mirror_residual(&self) -> f64 {
        let r2 = |v: &Vec4| Vector4::new(v[0], -v[1], v[2], v[3]);
        [
            (r2(&self.k) - self.k).norm(),
            (r2(&self.x) - self.x).norm(),
            (r2(&self.z_plus) - self.z_minus).norm(),
            (r2(&self.y_plus) - self.y_minus).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Uniform samples of all five edges.
    pub fn samples(&self, per_edge: usize) -> Vec<Vec4> {
        self.boundary_loop().iter().flat_map(|a| a.sample(per_edge)).collect()
    }
}

/// Builds the pentagon of either family.
pub fn build_pentagon(kind: PentagonKind) -> Result<Pentagon> {
    match kind {
        PentagonKind::LOmega(p) => {
            let p = PentagonParams::new(p.l, p.omega)?;
            let (l, w) = (p.l, p.omega);
            let rb = r_bar(l, w);
            let bp = GeodesicArc::new(GreatCircle::new_unchecked(z_pm(l, 1.0), u_pm(w, 1.0)), 0.0, rb);
            let bm = GeodesicArc::new(GreatCircle::new_unchecked(z_pm(l, -1.0), u_pm(w, -1.0)), 0.0, rb);
            let alpha = alpha_arc(l, w);
            let x = alpha.at(0.5 * alpha.length());
            Ok(Pentagon {
                kind: PentagonKind::LOmega(p),
                delta_plus: edge_delta(l, 1.0),
                delta_minus: edge_delta(l, -1.0),
                beta_plus: bp,
                beta_minus: bm,
                alpha,
                k: K,
                z_plus: bp.start,
                z_minus: bm.start,
                y_plus: bp.end,
                y_minus: bm.end,
                x,
            })
        }
        PentagonKind::Sigma(s) => {
            let s = SigmaParams::new(s.sigma)?;
            let bp = GeodesicArc::new(GreatCircle::new_unchecked(V_PLUS, u_pm(0.0, 1.0)), 0.0, FRAC_PI_4);
            let bm = GeodesicArc::new(GreatCircle::new_unchecked(V_MINUS, u_pm(0.0, -1.0)), 0.0, FRAC_PI_4);
            let alpha = alpha_sigma(s.sigma);
            Ok(Pentagon {
                kind: PentagonKind::Sigma(s),
                delta_plus: edge_delta(FRAC_PI_2, 1.0),
                delta_minus: edge_delta(FRAC_PI_2, -1.0),
                beta_plus: bp,
                beta_minus: bm,
                alpha,
                k: K,
                z_plus: V_PLUS,
                z_minus: V_MINUS,
                y_plus: I,
                y_minus: -I,
                x: x_sigma(s.sigma),
            })
        }
    }
}

/// Convenience constructor for the (l, ω) family.
pub fn pentagon_lw(l: f64, omega: f64) -> Result<Pentagon> {
    build_pentagon(PentagonKind::LOmega(PentagonParams::new(l, omega)?))
}

/// Convenience constructor for the σ family.
pub fn pentagon_sigma(sigma: f64) -> Result<Pentagon> {
    build_pentagon(PentagonKind::Sigma(SigmaParams::new(sigma)?))
}

/// A spherical polyhedron given as an intersection of closed half-spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    /// Faces with the sign s such that members satisfy s · ⟨n, p⟩ ≥ 0.
    pub faces: Vec<(GeodesicSphere, f64)>,
    pub j_x: Option<Vec4>,
    pub j_alpha: Option<Vec4>,
}

impl Polyhedron {
    /// Smallest signed face value at `p`.
    pub fn margin(&self, p: &Vec4) -> f64 {
        self.faces
            .iter()
            .map(|(s, sg)| sg * s.side(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership with tolerance [`MEMBERSHIP_TOL`].
    pub fn contains(&self, p: &Vec4) -> bool {
        self.margin(p) >= -MEMBERSHIP_TOL
    }
}

/// The bounding polyhedron of a pentagon.
///
/// C1: the convex hull bounded by S₃, S²_x, S²_α and S²_{β±}.
/// σ family: the region bounded by S₁, S₃ and S²_σ = span{e, i, x_σ}.
/// C2: the quarter of S³ bounded by S²_x ∪ S²_α that contains e.
pub fn polyhedron(p: &Pentagon) -> Result<Polyhedron> {
    match p.kind {
        PentagonKind::LOmega(pp) if pp.region.in_c1() => {
            let (jx, ja, _) = face_normals(pp.l, pp.omega);
            let centroid = normalize(p.vertices().iter().sum::<Vec4>() + p.x);
            let bplus = GeodesicSphere::from_normal(cross3(&K, &p.z_plus, &p.y_plus));
            let bminus = GeodesicSphere::from_normal(cross3(&K, &p.z_minus, &p.y_minus));
            let faces = vec![
                (GeodesicSphere::s3(), 1.0),
                (GeodesicSphere { normal: jx }, 1.0),
                (GeodesicSphere { normal: ja }, -1.0),
                (bplus, bplus.side(&centroid).signum()),
                (bminus, bminus.side(&centroid).signum()),
            ];
            Ok(Polyhedron {
                faces,
                j_x: Some(jx),
                j_alpha: Some(ja),
            })
        }
        PentagonKind::LOmega(pp) if pp.region == Region::C2 => {
            let (jx, ja, _) = face_normals(pp.l, pp.omega);
            let faces = vec![
                (GeodesicSphere { normal: jx }, jx.dot(&E).signum()),
                (GeodesicSphere { normal: ja }, ja.dot(&E).signum()),
            ];
            Ok(Polyhedron {
                faces,
                j_x: Some(jx),
                j_alpha: Some(ja),
            })
        }
        PentagonKind::Sigma(s) if s.sigma > 0.0 && s.sigma < FRAC_PI_2 => {
            let (ss, cs) = s.sigma.sin_cos();
            let faces = vec![
                (GeodesicSphere::s1(), 1.0),
                (GeodesicSphere::s3(), 1.0),
                (
                    GeodesicSphere {
                        normal: Vector4::new(0.0, 0.0, -cs, ss),
                    },
                    1.0,
                ),
            ];
            Ok(Polyhedron {
                faces,
                j_x: None,
                j_alpha: None,
            })
        }
        _ => Err(PentagonError::InvalidParams(
            "polyhedron defined for C1, C2 and sigma in (0, pi/2)".into(),
        )),
    }
}

/// The auxiliary function sin t − tan r̄(l₂, ω₂) · b(t) for two points of one level curve.
///
/// Here b(t) = cos a(t) + √2 tan τ̄ sin a(t) and a(t) = ω₂ + ρ₊(t − l₂) with
/// ρ₊ = (ω₁ − ω₂)/(l₁ − l₂).
pub fn level_pair_gap(tau: f64, omega1: f64, omega2: f64, t: f64) -> Result<f64> {
    let l1 = level_l(tau, omega1)?;
    let l2 = level_l(tau, omega2)?;
    let rho = (omega1 - omega2) / (l1 - l2);
    let a = omega2 + rho * (t - l2);
    let b = a.cos() + SQRT_2 * tau.tan() * a.sin();
    Ok(t.sin() - r_bar(l2, omega2).tan() * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classify_regions() {
        assert_eq!(classify(FRAC_PI_4, FRAC_PI_4), Region::Diag);
        assert_eq!(classify(1.2, 1.0), Region::Tplus);
        assert_eq!(classify(0.3, 0.3), Region::Tminus);
        assert_eq!(classify(2.0, -0.5), Region::C2);
        assert_eq!(classify(FRAC_PI_2, 0.4), Region::AxisLine);
        assert_eq!(classify(FRAC_PI_2, 0.0), Region::Excluded);
    }

    #[test]
    fn z_plus_at_pi_over_3() {
        let z = edge_delta(PI / 3.0, 1.0).end;
        let s = 3f64.sqrt() / 2.0 * std::f64::consts::FRAC_1_SQRT_2;
        assert!((z - Vector4::new(s, s, 0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn r_bar_value() {
        assert_abs_diff_eq!(r_bar(PI / 3.0, FRAC_PI_4), 0.68472, epsilon = 1e-5);
    }

    #[test]
    fn sigma_pentagon_vertices() {
        let p = pentagon_sigma(FRAC_PI_4).unwrap();
        assert!(p.closure_residual() < 1e-14);
        assert!(p.right_angle_residual() < 1e-14);
        assert!((p.x - normalize(K + J)).norm() < 1e-15);
    }
}
