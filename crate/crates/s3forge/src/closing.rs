//! Search for the closing parameters.
//!
//! Along each level curve τ = τ̄ of the region l + ω > π/2 the length L of
//! the mirror chain decreases in ω, so the point Ξ(τ̄) with L = π/2 is found
//! by bisection. The conjugate angle Θ(Ξ(τ)) then changes sign once in τ and
//! a second bisection locates its root. The degenerate family P_σ has its
//! own crossing σ̄ of the level L = π/2.

use crate::conjugate::{gauss_bonnet_theta, reconstruct_contour, ConjugateConfig, ConjugateError};
use crate::pentagon::{
    classify, hexagon_residual, level_l, level_omega_min, pentagon_lw, pentagon_sigma, tau_of, Pentagon, PentagonError,
    PentagonKind, Region,
};
use crate::plateau::{gamma_length, rho_profile, solve, EdgeTag, LadderEntry, MinimalDisk, PlateauError, SolveConfig};
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// Errors raised by the parameter search.
#[derive(Debug, Error)]
pub enum ClosingError {
    #[error("no sign change of {quantity} on the bracket; samples (x, value): {samples:?}")]
    BracketFailure {
        quantity: &'static str,
        samples: Vec<(f64, f64)>,
    },
    #[error("inner solve failed at {at}: {message}")]
    InnerSolveFailure { at: String, message: String },
    #[error("invalid closing configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Pentagon(#[from] PentagonError),
    #[error(transparent)]
    Plateau(#[from] PlateauError),
    #[error(transparent)]
    Conjugate(#[from] ConjugateError),
}

pub type Result<T> = std::result::Result<T, ClosingError>;

/// Tolerances and brackets of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosingConfig {
    pub solve: SolveConfig,
    pub conjugate: ConjugateConfig,
    pub l_tol: f64,
    pub theta_tol: f64,
    pub xtol: f64,
    /// Initial τ bracket of the outer search.
    pub tau_bracket: (f64, f64),
    /// τ bracket tried when the initial one shows no sign change.
    pub tau_bracket_wide: (f64, f64),
    /// σ bracket of the degenerate-family search.
    pub sigma_bracket: (f64, f64),
}

impl Default for ClosingConfig {
    fn default() -> Self {
        Self {
            solve: SolveConfig::default(),
            conjugate: ConjugateConfig::default(),
            l_tol: 5e-3,
            theta_tol: 5e-3,
            xtol: 1e-4,
            tau_bracket: (0.15, 1.35),
            tau_bracket_wide: (0.08, 1.45),
            sigma_bracket: (0.3, 1.45),
        }
    }
}

impl ClosingConfig {
    /// Range checks.
    pub fn validate(&self) -> Result<()> {
        self.solve.validate()?;
        let positive = [self.l_tol, self.theta_tol, self.xtol];
        if positive.iter().any(|t| t.is_nan() || *t <= 0.0) {
            return Err(ClosingError::InvalidConfig("tolerances must be positive".into()));
        }
        for (name, (a, b)) in [
            ("tau_bracket", self.tau_bracket),
            ("tau_bracket_wide", self.tau_bracket_wide),
            ("sigma_bracket", self.sigma_bracket),
        ] {
            if !(a > 0.0 && a < b && b < FRAC_PI_2) {
                return Err(ClosingError::InvalidConfig(format!(
                    "{name} = ({a}, {b}) must satisfy 0 < a < b < pi/2"
                )));
            }
        }
        Ok(())
    }

    /// Stopping threshold of the outer Θ search, inside `theta_tol` to leave room for rounding.
    pub fn outer_tol(&self) -> f64 {
        0.5 * self.theta_tol
    }

    /// Sensitivity of the inner L search.
    pub fn inner_tol(&self) -> f64 {
        0.2 * self.theta_tol
    }
}

/// Upper bound ceil(log2(range/xtol)) on bisection steps.
pub fn bisection_budget(range: f64, xtol: f64) -> usize {
    (range / xtol).log2().ceil().max(1.0) as usize
}

/// Bisection for a sign change of `f` on [a, b] with known end values.
///
/// Stops when |f| ≤ `ftol` or the bracket is shorter than `xtol`, returning
/// the evaluated point with the smallest |f| and the number of steps.
fn bisect<T, F>(mut f: F, (mut a, mut fa): (f64, f64), mut b: f64, xtol: f64, ftol: f64) -> Result<(f64, f64, T, usize)>
where
    F: FnMut(f64) -> Result<(f64, T)>,
{
    let budget = bisection_budget((b - a).abs(), xtol);
    let mut best: Option<(f64, f64, T)> = None;
    let mut steps = 0;
    while steps < budget {
        let m = 0.5 * (a + b);
        let (fm, extra) = f(m)?;
        steps += 1;
        let done = fm.abs() <= ftol || (b - a).abs() <= 2.0 * xtol;
        if best.as_ref().is_none_or(|(_, v, _)| fm.abs() < v.abs()) {
            best = Some((m, fm, extra));
        }
        if done {
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let (x, fx, extra) = best.expect("at least one bisection step");
    Ok((x, fx, extra, steps))
}

/// Solves the disk of P_{l,ω} and returns it with the extrapolated mirror-chain length.
pub fn mirror_length(pent: &Pentagon, cfg: &SolveConfig) -> Result<(f64, MinimalDisk)> {
    let disk = solve(pent, cfg)?;
    let (_, ex) = gamma_length(&disk)?;
    Ok((ex, disk))
}

/// Extra measurements attached to a level-set point.
#[derive(Debug, Clone, PartialEq)]
pub struct XiDiagnostics {
    /// Every (ω, L) evaluated, in order.
    pub evaluations: Vec<(f64, f64)>,
    pub bisection_steps: usize,
    pub area: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Θ by the Gauss–Bonnet route.
    pub theta_gauss_bonnet: Option<f64>,
    /// Distance a from k to z*.
    pub a: f64,
    pub closure_gap: Option<f64>,
    pub ladder: Vec<LadderEntry>,
}

/// A point Ξ(τ̄) of the level set L = π/2.
#[derive(Debug, Clone, PartialEq)]
pub struct XiPoint {
    pub tau: f64,
    pub omega_tau: f64,
    pub l: f64,
    /// L − π/2 at the returned point.
    pub l_residual: f64,
    pub theta: f64,
    pub diagnostics: XiDiagnostics,
}

impl XiPoint {
    /// Extrapolated mirror-chain length.
    pub fn length(&self) -> f64 {
        FRAC_PI_2 + self.l_residual
    }
}

fn level_pentagon(tau: f64, omega: f64) -> Result<Pentagon> {
    let l = level_l(tau, omega)?;
    if classify(l, omega) != Region::Tplus {
        return Err(ClosingError::InvalidConfig(format!(
            "level point (l, omega) = ({l}, {omega}) leaves the region l + omega > pi/2"
        )));
    }
    Ok(pentagon_lw(l, omega)?)
}

fn inner_failure(tau: f64, omega: f64, e: ClosingError) -> ClosingError {
    match e {
        ClosingError::Plateau(p) => ClosingError::InnerSolveFailure {
            at: format!("tau = {tau}, omega = {omega}"),
            message: p.to_string(),
        },
        other => other,
    }
}

/// The ω at which the level curve τ = τ̄ reaches length parameter `l`.
///
/// The level curve decreases from l = π/2 at ω_min(τ̄) to l = 0 at ω = π/2.
pub fn level_omega_at(tau: f64, l: f64) -> Result<f64> {
    if !(l > 0.0 && l < FRAC_PI_2) {
        return Err(ClosingError::InvalidConfig(format!("l = {l} outside (0, pi/2)")));
    }
    let (mut a, mut b) = (level_omega_min(tau), FRAC_PI_2);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if level_l(tau, m)? > l {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locates ω with L(l_τ̄(ω), ω) = π/2 on the level curve τ = τ̄.
///
/// The lower bracket end sits where l is just below π/2, near the vertex
/// ω_min(τ̄) of the level curve, where L > π/2; the upper end approaches ω = π/2, where the
/// pentagon collapses and L < π/2.
pub fn find_omega_on_level(tau: f64, cfg: &ClosingConfig) -> Result<XiPoint> {
    cfg.validate()?;
    if !(tau > 0.0 && tau < FRAC_PI_2) {
        return Err(ClosingError::InvalidConfig(format!("tau = {tau} outside (0, pi/2)")));
    }
    let range = FRAC_PI_2 - level_omega_min(tau);
    let mut evaluations = Vec::new();
    // The curve is parameterized by l, in which L stays smooth up to the vertex.
    let mut eval = |l: f64| -> Result<(f64, (f64, MinimalDisk))> {
        let omega = level_omega_at(tau, l)?;
        let pent = level_pentagon(tau, omega)?;
        let (len, disk) = mirror_length(&pent, &cfg.solve).map_err(|e| inner_failure(tau, omega, e))?;
        evaluations.push((omega, len));
        Ok((len - FRAC_PI_2, (omega, disk)))
    };

    let mut long_end = None;
    for gap in [0.02, 0.006, 0.002] {
        let l = FRAC_PI_2 - gap;
        let (f, _) = eval(l)?;
        if f > 0.0 {
            long_end = Some(l);
            break;
        }
    }
    let mut short_end = None;
    for frac in [0.1, 0.04, 0.015] {
        let l = level_l(tau, FRAC_PI_2 - frac * range)?;
        let (f, _) = eval(l)?;
        if f < 0.0 {
            short_end = Some((l, f));
            break;
        }
    }
    let (Some(long_end), Some(short_end)) = (long_end, short_end) else {
        return Err(ClosingError::BracketFailure {
            quantity: "L - pi/2 along the level curve",
            samples: evaluations.iter().map(|(w, len)| (*w, len - FRAC_PI_2)).collect(),
        });
    };
    let (l, f, (omega, disk), steps) = bisect(&mut eval, short_end, long_end, cfg.xtol, cfg.inner_tol())?;
    let pent = pentagon_lw(l, omega)?;
    let contour = reconstruct_contour(&disk, &pent, &cfg.conjugate)?;
    let theta_gb = gauss_bonnet_theta(&contour, omega).ok();
    Ok(XiPoint {
        tau,
        omega_tau: omega,
        l,
        l_residual: f,
        theta: contour.theta,
        diagnostics: XiDiagnostics {
            evaluations,
            bisection_steps: steps,
            area: disk.area_extrapolated(),
            grad_norm: disk.grad_norm(),
            iterations: disk.iterations(),
            theta_gauss_bonnet: theta_gb,
            a: contour.a,
            closure_gap: contour.closure_gap,
            ladder: disk.ladder.clone(),
        },
    })
}

/// The root of Θ along the level set L = π/2.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosingSolution {
    pub l_star: f64,
    pub omega_star: f64,
    pub tau_star: f64,
    pub l_value: f64,
    pub theta_value: f64,
    pub hexagon_residual: f64,
    /// Refinement ladder of the disk at the solution.
    pub ladder: Vec<LadderEntry>,
    /// Level-set points evaluated by the outer search, in order.
    pub history: Vec<XiPoint>,
    /// The τ bracket on which Θ changed sign.
    pub bracket: (f64, f64),
    pub bisection_steps: usize,
}

impl ClosingSolution {
    /// The solution as a level-set point.
    pub fn xi(&self) -> &XiPoint {
        self.history
            .iter()
            .find(|x| x.tau == self.tau_star)
            .expect("solution is among the evaluated points")
    }
}

/// Bisection in τ on Θ(Ξ(τ)).
///
/// The endpoint signs must be Θ < 0 near (π/2, 0) and Θ > 0 at large ω_τ.
/// If the initial bracket does not show them, the wide bracket is tried once.
pub fn solve_closing(cfg: &ClosingConfig) -> Result<ClosingSolution> {
    cfg.validate()?;
    let mut history: Vec<XiPoint> = Vec::new();
    let theta_at = |tau: f64, history: &mut Vec<XiPoint>| -> Result<f64> {
        let xi = find_omega_on_level(tau, cfg)?;
        let th = xi.theta;
        history.push(xi);
        Ok(th)
    };
    let mut bracket = None;
    for (a, b) in [cfg.tau_bracket, cfg.tau_bracket_wide] {
        let ta = theta_at(a, &mut history)?;
        let tb = theta_at(b, &mut history)?;
        if ta < 0.0 && tb > 0.0 {
            bracket = Some(((a, ta), (b, tb)));
            break;
        }
    }
    let Some((lo, hi)) = bracket else {
        return Err(ClosingError::BracketFailure {
            quantity: "theta along the level set",
            samples: history.iter().map(|x| (x.tau, x.theta)).collect(),
        });
    };
    let (tau_star, theta, _, steps) = bisect(
        |t| theta_at(t, &mut history).map(|v| (v, ())),
        lo,
        hi.0,
        cfg.xtol,
        cfg.outer_tol(),
    )?;
    let xi = history
        .iter()
        .rev()
        .find(|x| x.tau == tau_star)
        .expect("evaluated point")
        .clone();
    Ok(ClosingSolution {
        l_star: xi.l,
        omega_star: xi.omega_tau,
        tau_star,
        l_value: xi.length(),
        theta_value: theta,
        hexagon_residual: hexagon_residual(xi.l, xi.omega_tau),
        ladder: xi.diagnostics.ladder.clone(),
        history,
        bracket: (lo.0, hi.0),
        bisection_steps: steps,
    })
}

/// Θ at τ* − δ and τ* + δ, for the local sign-change check.
pub fn local_sign_check(tau_star: f64, delta: f64, cfg: &ClosingConfig) -> Result<(f64, f64)> {
    let below = find_omega_on_level(tau_star - delta, cfg)?.theta;
    let above = find_omega_on_level(tau_star + delta, cfg)?.theta;
    Ok((below, above))
}

/// Crossing of the degenerate family with the level L = π/2.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaBar {
    pub sigma: f64,
    /// L − π/2 at σ̄.
    pub l_residual: f64,
    /// Every (σ, L) evaluated, in order.
    pub evaluations: Vec<(f64, f64)>,
    pub bisection_steps: usize,
}

/// Bisection on L(σ) = π/2 inside the σ bracket.
pub fn sigma_bar(cfg: &ClosingConfig) -> Result<SigmaBar> {
    cfg.validate()?;
    let mut evaluations = Vec::new();
    let mut eval = |s: f64| -> Result<(f64, ())> {
        let pent = pentagon_sigma(s)?;
        let (len, _) = mirror_length(&pent, &cfg.solve).map_err(|e| match e {
            ClosingError::Plateau(p) => ClosingError::InnerSolveFailure {
                at: format!("sigma = {s}"),
                message: p.to_string(),
            },
            other => other,
        })?;
        evaluations.push((s, len));
        Ok((len - FRAC_PI_2, ()))
    };
    let (a, b) = cfg.sigma_bracket;
    let (fa, _) = eval(a)?;
    let (fb, _) = eval(b)?;
    if !(fa < 0.0 && fb > 0.0) {
        return Err(ClosingError::BracketFailure {
            quantity: "L(sigma) - pi/2",
            samples: evaluations.iter().map(|(s, len)| (*s, len - FRAC_PI_2)).collect(),
        });
    }
    let (sigma, f, _, steps) = bisect(&mut eval, (a, fa), b, cfg.xtol, 0.2 * cfg.l_tol)?;
    Ok(SigmaBar {
        sigma,
        l_residual: f,
        evaluations,
        bisection_steps: steps,
    })
}

/// A point of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    LOmega { l: f64, omega: f64 },
    Sigma(f64),
}

impl SweepPoint {
    fn pentagon(self) -> Result<Pentagon> {
        Ok(match self {
            SweepPoint::LOmega { l, omega } => pentagon_lw(l, omega)?,
            SweepPoint::Sigma(s) => pentagon_sigma(s)?,
        })
    }
}

/// Row-major grid of (l, ω) points with `nl` × `nw` samples, keeping only C1 points.
pub fn grid_points(l_range: (f64, f64), omega_range: (f64, f64), nl: usize, nw: usize) -> Vec<SweepPoint> {
    let lin = |(a, b): (f64, f64), n: usize, i: usize| {
        if n <= 1 {
            a
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(nl * nw);
    for i in 0..nl {
        for j in 0..nw {
            let (l, omega) = (lin(l_range, nl, i), lin(omega_range, nw, j));
            if classify(l, omega).in_c1() {
                out.push(SweepPoint::LOmega { l, omega });
            }
        }
    }
    out
}

/// One row of a sweep table. Failed rows carry the error and NaN measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub l: f64,
    pub omega: f64,
    pub tau: f64,
    pub resolution: usize,
    pub area: f64,
    pub l_gamma: f64,
    pub theta: f64,
    pub rho_delta_end: f64,
    pub hex_residual: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub error: Option<String>,
}

impl SweepRow {
    /// Whether the solve converged.
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Solves and measures one sweep point. Θ is NaN where the conjugate contour is undefined.
pub fn evaluate_point(point: SweepPoint, cfg: &ClosingConfig) -> SweepRow {
    let (l, omega) = match point {
        SweepPoint::LOmega { l, omega } => (l, omega),
        SweepPoint::Sigma(s) => pentagon_sigma(s).map(|p| (p.l(), p.omega())).unwrap_or((f64::NAN, 0.0)),
    };
    let mut row = SweepRow {
        l,
        omega,
        tau: tau_of(l, omega),
        resolution: cfg.solve.n,
        area: f64::NAN,
        l_gamma: f64::NAN,
        theta: f64::NAN,
        rho_delta_end: f64::NAN,
        hex_residual: hexagon_residual(l, omega),
        grad_norm: f64::NAN,
        iters: 0,
        error: None,
    };
    let measured = (|| -> Result<()> {
        let pent = point.pentagon()?;
        let (len, disk) = mirror_length(&pent, &cfg.solve)?;
        row.resolution = disk.mesh().resolution;
        row.area = disk.area_extrapolated();
        row.l_gamma = len;
        row.grad_norm = disk.grad_norm();
        row.iters = disk.iterations();
        if matches!(pent.kind, PentagonKind::LOmega(_)) {
            row.rho_delta_end = rho_profile(disk.mesh(), &pent, EdgeTag::DeltaPlus)?.end_value();
            if omega > 0.0 {
                if let Ok(c) = reconstruct_contour(&disk, &pent, &cfg.conjugate) {
                    row.theta = c.theta;
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = measured {
        row.error = Some(e.to_string());
    }
    row
}

/// Evaluates all points concurrently; rows keep the input order.
pub fn sweep(points: &[SweepPoint], cfg: &ClosingConfig) -> Vec<SweepRow> {
    points.par_iter().map(|p| evaluate_point(*p, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_budget_matches_log2() {
        assert_eq!(bisection_budget(1.2, 1e-4), 14);
        assert_eq!(bisection_budget(1.0, 0.5), 1);
    }

    #[test]
    fn bisect_finds_cubic_root() {
        let f = |x: f64| Ok::<_, ClosingError>((x * x * x - 0.3, ()));
        let (x, _, _, steps) = bisect(f, (0.0, -0.3), 1.0, 1e-6, 0.0).unwrap();
        assert!((x - 0.3f64.cbrt()).abs() < 2e-6);
        assert!(steps <= bisection_budget(1.0, 1e-6));
    }

    #[test]
    fn grid_is_row_major_in_c1() {
        let g = grid_points((0.6, 1.4), (0.2, 1.2), 3, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[1], SweepPoint::LOmega { l: 0.6, omega: 0.7 });
        assert_eq!(g[3], SweepPoint::LOmega { l: 1.0, omega: 0.2 });
    }

    #[test]
    fn config_rejects_inverted_bracket() {
        let cfg = ClosingConfig {
            tau_bracket: (1.0, 0.5),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
