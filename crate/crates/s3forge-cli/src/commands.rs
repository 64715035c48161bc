//! Command implementations and their JSON reports.

use crate::config::{ConfigError, MeshFormat, Settings};
use crate::export::{self, ExportError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use s3forge::assembly::{
    d4h_elements, d4h_piece, euler_genus, extrapolated_total_area, great_sphere_mesh, group_assemble,
    lawson_quadrilateral, orbit_assemble, self_intersection_check, solve_lawson_disk, symmetry_residual, total_area,
    umbilic_candidates, Assembled, FundamentalPiece, LawsonDisk,
};
use s3forge::closing::{grid_points, mirror_length, solve_closing, sweep, ClosingConfig, SweepPoint, XiPoint};
use s3forge::conjugate::{gauss_bonnet_theta, reconstruct_contour};
use s3forge::pentagon::{
    hexagon_residual, level_l, level_omega_min, midpoint_x, pentagon_lw, pentagon_sigma, r_bar, r_bar_residual, tau_of,
    theta_beta_closedform, GeodesicArc, Pentagon, PentagonKind,
};
use s3forge::plateau::{rho_profile, EdgeTag, LadderEntry, SolveConfig};
use s3forge::s3core::{Vec4, K};
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;
use thiserror::Error;

/// Subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pentagon,
    Solve,
    Sweep,
    Close,
    Lawson,
    Assemble,
    Check,
    Export,
}

/// Errors of a command run, each with its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// Process exit status: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn solver<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Solver(e.to_string())
}

/// Solver settings derived from the resolved configuration.
pub fn solve_config(s: &Settings) -> SolveConfig {
    SolveConfig {
        n: s.resolution,
        levels: s.levels,
        max_iter: s.max_iter,
        g_tol: s.tol,
        ..SolveConfig::default()
    }
}

/// Search settings derived from the resolved configuration.
pub fn closing_config(s: &Settings) -> ClosingConfig {
    ClosingConfig {
        solve: solve_config(s),
        l_tol: s.l_tol,
        theta_tol: s.theta_tol,
        xtol: s.xtol,
        ..ClosingConfig::default()
    }
}

fn require_pentagon(s: &Settings) -> Result<Pentagon> {
    match (s.l, s.omega, s.sigma) {
        (Some(l), Some(omega), None) => {
            pentagon_lw(l, omega).map_err(|e| CliError::Config(ConfigError::Missing(e.to_string())))
        }
        (None, None, Some(sigma)) => {
            pentagon_sigma(sigma).map_err(|e| CliError::Config(ConfigError::Missing(e.to_string())))
        }
        _ => Err(CliError::Config(ConfigError::Missing(
            "give either both --l and --omega, or --sigma alone".into(),
        ))),
    }
}

fn v4(v: &Vec4) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

fn write_json<T: Serialize>(value: &T, s: &Settings, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    match &s.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ArcDoc {
    pub name: &'static str,
    pub p: [f64; 4],
    pub v: [f64; 4],
    pub t0: f64,
    pub t1: f64,
    pub start: [f64; 4],
    pub end: [f64; 4],
    pub length: f64,
}

fn arc_doc(name: &'static str, a: &GeodesicArc) -> ArcDoc {
    ArcDoc {
        name,
        p: v4(&a.circle.p),
        v: v4(&a.circle.v),
        t0: a.t0,
        t1: a.t1,
        start: v4(&a.start),
        end: v4(&a.end),
        length: a.length(),
    }
}

#[derive(Debug, Serialize)]
pub struct VerticesDoc {
    pub k: [f64; 4],
    pub z_plus: [f64; 4],
    pub y_plus: [f64; 4],
    pub y_minus: [f64; 4],
    pub z_minus: [f64; 4],
    pub x: [f64; 4],
}

#[derive(Debug, Serialize)]
pub struct PentagonDoc {
    pub family: &'static str,
    pub l: f64,
    pub omega: f64,
    pub sigma: Option<f64>,
    pub region: Option<String>,
    pub tau: f64,
    pub r_bar: f64,
    pub s_bar: f64,
    pub hexagon_residual: f64,
    pub vertices: VerticesDoc,
    pub arcs: Vec<ArcDoc>,
    pub right_angle_residual: f64,
    pub closure_residual: f64,
    pub mirror_residual: f64,
}

/// JSON description of a pentagon.
pub fn pentagon_doc(p: &Pentagon) -> PentagonDoc {
    let (family, sigma, region) = match p.kind {
        PentagonKind::LOmega(q) => ("l_omega", None, Some(format!("{:?}", q.region))),
        PentagonKind::Sigma(q) => ("sigma", Some(q.sigma), None),
    };
    PentagonDoc {
        family,
        l: p.l(),
        omega: p.omega(),
        sigma,
        region,
        tau: tau_of(p.l(), p.omega()),
        r_bar: p.r_bar(),
        s_bar: p.s_bar(),
        hexagon_residual: hexagon_residual(p.l(), p.omega()),
        vertices: VerticesDoc {
            k: v4(&p.k),
            z_plus: v4(&p.z_plus),
            y_plus: v4(&p.y_plus),
            y_minus: v4(&p.y_minus),
            z_minus: v4(&p.z_minus),
            x: v4(&p.x),
        },
        arcs: vec![
            arc_doc("delta_plus", &p.delta_plus),
            arc_doc("beta_plus", &p.beta_plus),
            arc_doc("alpha", &p.alpha),
            arc_doc("beta_minus", &p.beta_minus),
            arc_doc("delta_minus", &p.delta_minus),
        ],
        right_angle_residual: p.right_angle_residual(),
        closure_residual: p.closure_residual(),
        mirror_residual: p.mirror_residual(),
    }
}

#[derive(Debug, Serialize)]
pub struct LadderDoc {
    pub resolution: usize,
    pub h: f64,
    pub area: f64,
    pub gamma_length: Option<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
}

fn ladder_doc(ladder: &[LadderEntry]) -> Vec<LadderDoc> {
    ladder
        .iter()
        .map(|e| LadderDoc {
            resolution: e.resolution,
            h: e.h,
            area: e.area,
            gamma_length: e.gamma_length,
            grad_norm: e.grad_norm,
            iterations: e.iterations,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct SolveDoc {
    pub pentagon: PentagonDoc,
    pub ladder: Vec<LadderDoc>,
    pub area_extrapolated: f64,
    pub l_gamma: f64,
    pub rho_delta_end: Option<f64>,
    pub rho_delta_expected: Option<f64>,
    pub rho_beta_end: Option<f64>,
    pub rho_beta_expected: Option<f64>,
    pub theta: Option<f64>,
    pub theta_gauss_bonnet: Option<f64>,
}

fn solve_doc(s: &Settings) -> Result<SolveDoc> {
    let pent = require_pentagon(s)?;
    let cfg = closing_config(s);
    let (len, disk) = mirror_length(&pent, &cfg.solve).map_err(solver)?;
    let (l, omega) = (pent.l(), pent.omega());
    let lw = matches!(pent.kind, PentagonKind::LOmega(_));
    let rho = |edge| -> Result<Option<f64>> {
        if lw {
            Ok(Some(rho_profile(disk.mesh(), &pent, edge).map_err(solver)?.end_value()))
        } else {
            Ok(None)
        }
    };
    let (theta, theta_gb) = if lw && omega > 0.0 {
        let c = reconstruct_contour(&disk, &pent, &cfg.conjugate).map_err(solver)?;
        (Some(c.theta), gauss_bonnet_theta(&c, omega).ok())
    } else {
        (None, None)
    };
    Ok(SolveDoc {
        ladder: ladder_doc(&disk.ladder),
        area_extrapolated: disk.area_extrapolated(),
        l_gamma: len,
        rho_delta_end: rho(EdgeTag::DeltaPlus)?,
        rho_delta_expected: lw.then_some(PI - omega),
        rho_beta_end: rho(EdgeTag::BetaPlus)?,
        rho_beta_expected: lw.then(|| theta_beta_closedform(l, omega)),
        theta,
        theta_gauss_bonnet: theta_gb,
        pentagon: pentagon_doc(&pent),
    })
}

#[derive(Debug, Serialize)]
pub struct XiDoc {
    pub tau: f64,
    pub omega: f64,
    pub l: f64,
    pub length: f64,
    pub theta: f64,
    pub theta_gauss_bonnet: Option<f64>,
}

fn xi_doc(x: &XiPoint) -> XiDoc {
    XiDoc {
        tau: x.tau,
        omega: x.omega_tau,
        l: x.l,
        length: x.length(),
        theta: x.theta,
        theta_gauss_bonnet: x.diagnostics.theta_gauss_bonnet,
    }
}

#[derive(Debug, Serialize)]
pub struct ClosingDoc {
    pub l_star: f64,
    pub omega_star: f64,
    pub tau_star: f64,
    pub length: f64,
    pub length_gap: f64,
    pub theta: f64,
    pub hexagon_residual: f64,
    pub bracket: (f64, f64),
    pub bisection_steps: usize,
    pub ladder: Vec<LadderDoc>,
    pub history: Vec<XiDoc>,
}

#[derive(Debug, Serialize)]
pub struct LawsonDoc {
    pub quadrilateral_angles: [f64; 4],
    pub right_angle_residual: f64,
    pub l_levels: Vec<f64>,
    pub l_lawson: f64,
    pub ladder: Vec<LadderDoc>,
    pub disk_area_extrapolated: f64,
}

fn lawson_doc(ld: &LawsonDisk) -> LawsonDoc {
    LawsonDoc {
        quadrilateral_angles: ld.quad.angles(),
        right_angle_residual: ld.quad.right_angle_residual(),
        l_levels: ld.l_levels.clone(),
        l_lawson: ld.l_lawson,
        ladder: ladder_doc(&ld.disk.ladder),
        disk_area_extrapolated: ld.disk.area_extrapolated(),
    }
}

#[derive(Debug, Serialize)]
pub struct AssembleDoc {
    pub lawson: LawsonDoc,
    pub copies: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub chi: i64,
    pub genus: i64,
    pub area: f64,
    pub area_extrapolated: f64,
    pub below_8pi: bool,
    pub candidate_pairs: usize,
    pub intersections: usize,
    pub symmetry_residual: f64,
    pub umbilics: Vec<[f64; 4]>,
    pub d4h_copies: usize,
    pub d4h_chi: i64,
    pub d4h_area: f64,
}

/// Solves the Lawson disk and assembles the closed surface from the quadrilateral orbit.
pub fn lawson_surface(s: &Settings) -> Result<(LawsonDisk, Assembled)> {
    let ld = solve_lawson_disk(&solve_config(s)).map_err(solver)?;
    let piece = FundamentalPiece::from_disk(ld.disk.mesh());
    let surface = orbit_assemble(&piece).map_err(solver)?;
    Ok((ld, surface))
}

fn assemble_doc(s: &Settings) -> Result<AssembleDoc> {
    let (ld, surface) = lawson_surface(s)?;
    let (chi, genus) = euler_genus(&surface.mesh).map_err(solver)?;
    let area = total_area(&surface.mesh);
    let area_ex = extrapolated_total_area(&ld.disk, surface.copies.len());
    let group = d4h_elements();
    let report = self_intersection_check(&surface.mesh);
    let piece = d4h_piece(ld.disk.mesh(), &ld.quad);
    let d4h = group_assemble(&piece, &group).map_err(solver)?;
    let (d4h_chi, _) = euler_genus(&d4h.mesh).map_err(solver)?;
    Ok(AssembleDoc {
        copies: surface.copies.len(),
        vertices: surface.mesh.vertices.len(),
        triangles: surface.mesh.triangles.len(),
        chi,
        genus,
        area,
        area_extrapolated: area_ex,
        below_8pi: area_ex < 8.0 * PI,
        candidate_pairs: report.candidate_pairs,
        intersections: report.intersections,
        symmetry_residual: symmetry_residual(&surface.mesh, &group),
        umbilics: umbilic_candidates(&surface.mesh, 4, 0.5).iter().map(v4).collect(),
        d4h_copies: d4h.copies.len(),
        d4h_chi,
        d4h_area: total_area(&d4h.mesh),
        lawson: lawson_doc(&ld),
    })
}

fn sweep_points(s: &Settings) -> Vec<SweepPoint> {
    let g = &s.grid;
    if g.sigma.is_empty() {
        grid_points(g.l, g.omega, g.l_steps, g.omega_steps)
    } else {
        g.sigma.iter().map(|&x| SweepPoint::Sigma(x)).collect()
    }
}

fn run_sweep(s: &Settings, stdout: &mut dyn Write) -> Result<()> {
    let rows = sweep(&sweep_points(s), &closing_config(s));
    for r in rows.iter().filter(|r| !r.ok()) {
        eprintln!(
            "sweep point (l = {}, omega = {}) failed: {}",
            r.l,
            r.omega,
            r.error.as_deref().unwrap_or("")
        );
    }
    match &s.out {
        Some(path) => export::write_csv(&rows, std::io::BufWriter::new(std::fs::File::create(path)?))?,
        None => export::write_csv(&rows, &mut *stdout)?,
    }
    Ok(())
}

fn run_close(s: &Settings, stdout: &mut dyn Write) -> Result<()> {
    let cfg = closing_config(s);
    let sol = solve_closing(&cfg).map_err(solver)?;
    let doc = ClosingDoc {
        l_star: sol.l_star,
        omega_star: sol.omega_star,
        tau_star: sol.tau_star,
        length: sol.l_value,
        length_gap: sol.l_value - FRAC_PI_2,
        theta: sol.theta_value,
        hexagon_residual: sol.hexagon_residual,
        bracket: sol.bracket,
        bisection_steps: sol.bisection_steps,
        ladder: ladder_doc(&sol.ladder),
        history: sol.history.iter().map(xi_doc).collect(),
    };
    write_json(&doc, s, stdout)?;
    if (sol.l_value - FRAC_PI_2).abs() > cfg.l_tol || sol.theta_value.abs() > cfg.theta_tol {
        return Err(CliError::Solver(format!(
            "closing conditions not met: L - pi/2 = {:e}, theta = {:e}",
            sol.l_value - FRAC_PI_2,
            sol.theta_value
        )));
    }
    Ok(())
}

fn run_export(s: &Settings) -> Result<()> {
    let path = s
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config(ConfigError::Missing("export needs --out".into())))?;
    let (vertices, triangles) = if s.l.is_some() || s.omega.is_some() || s.sigma.is_some() {
        let pent = require_pentagon(s)?;
        let (_, disk) = mirror_length(&pent, &solve_config(s)).map_err(solver)?;
        let m = disk.mesh();
        (m.vertices.clone(), m.triangles.clone())
    } else {
        let (_, surface) = lawson_surface(s)?;
        (surface.mesh.vertices, surface.mesh.triangles)
    };
    let projected = export::export_mesh(&vertices, &triangles, s.format, path, s.prerotate)?;
    let kind = match s.format {
        MeshFormat::Obj => "obj",
        MeshFormat::Ply => "ply",
    };
    eprintln!(
        "wrote {} vertices, {} faces as {kind} to {}",
        projected.points.len(),
        projected.triangles.len(),
        path.display()
    );
    Ok(())
}

/// Outcome of one runtime property check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, value: f64, bound: f64) -> CheckResult {
    CheckResult {
        name,
        passed: value.is_finite() && value <= bound,
        detail: format!("{value:.3e} <= {bound:.0e}"),
    }
}

/// Runs the property checks. Random samples are drawn from a generator seeded with `seed`.
pub fn run_checks(s: &Settings) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (l, omega) = (
            rng.random_range(0.05..FRAC_PI_2 - 0.05),
            rng.random_range(0.05..FRAC_PI_2 - 0.05),
        );
        if let Ok(p) = pentagon_lw(l, omega) {
            worst = worst
                .max(p.right_angle_residual())
                .max(p.closure_residual())
                .max(p.mirror_residual());
        }
        worst = worst.max(r_bar_residual(l, omega, r_bar(l, omega)).abs());
    }
    out.push(outcome(
        "pentagon right angles, closure, mirror and r_bar",
        worst,
        1e-10,
    ));

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let tau = rng.random_range(0.05..1.45);
        let lo = level_omega_min(tau);
        let omega = rng.random_range(lo + 1e-3..FRAC_PI_2 - 1e-3);
        if let Ok(l) = level_l(tau, omega) {
            worst = worst.max((tau_of(l, omega) - tau).abs());
        }
    }
    out.push(outcome("tau level-curve round trip", worst, 1e-10));

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let l = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let (x, _, _) = midpoint_x(l, FRAC_PI_2 - l);
        worst = worst.max((x - Vec4::new(0.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm());
    }
    out.push(outcome("diagonal midpoint constant", worst, 1e-12));

    let group = d4h_elements();
    out.push(CheckResult {
        name: "symmetry group order 16 and closed",
        passed: group.len() == 16 && group.closure_residual() < 1e-12,
        detail: format!("order {}, closure {:.1e}", group.len(), group.closure_residual()),
    });
    out.push(outcome(
        "Lawson quadrilateral right angles",
        lawson_quadrilateral().right_angle_residual(),
        1e-12,
    ));

    let sphere = great_sphere_mesh(&Vec4::new(1.0, 0.0, 0.0, 0.0), 2);
    let genus_ok = matches!(euler_genus(&sphere), Ok((2, 0)));
    out.push(CheckResult {
        name: "great sphere mesh has genus 0 and no self-intersections",
        passed: genus_ok && self_intersection_check(&sphere).embedded(),
        detail: format!("{:?}", euler_genus(&sphere).ok()),
    });

    let roundtrip = (|| -> std::result::Result<bool, String> {
        let projected = export::project(&sphere.vertices, &sphere.triangles, true).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        export::write_obj(&mut buf, &projected).map_err(|e| e.to_string())?;
        let parsed = export::parse_obj(&String::from_utf8_lossy(&buf))?;
        Ok(parsed.points == projected.points && parsed.faces == projected.triangles)
    })();
    out.push(CheckResult {
        name: "OBJ export round trip is exact",
        passed: roundtrip == Ok(true),
        detail: format!("{roundtrip:?}"),
    });

    let k_line = export::project(
        &[K, Vec4::new(1.0, 0.0, 0.0, 0.0), Vec4::new(0.0, 1.0, 0.0, 0.0)],
        &[[0, 1, 2]],
        false,
    )
    .map(|p| p.points[0]);
    out.push(CheckResult {
        name: "k projects to the origin",
        passed: k_line.as_ref().is_ok_and(|p| *p == [0.0; 3]),
        detail: format!("{k_line:?}"),
    });

    let flat = (|| -> std::result::Result<(f64, f64), String> {
        let l = FRAC_PI_4;
        let pent = pentagon_lw(l, 0.0).map_err(|e| e.to_string())?;
        let (len, disk) = mirror_length(&pent, &solve_config(s)).map_err(|e| e.to_string())?;
        let j = Vec4::new(0.0, 0.0, 1.0, 0.0);
        let off = disk.mesh().vertices.iter().map(|v| v.dot(&j).abs()).fold(0.0, f64::max);
        let expected = (2f64.sqrt() * l.sin() / (1.0 + l.sin().powi(2)).sqrt()).acos();
        Ok((off, (len - expected).abs()))
    })();
    let (off, gap) = flat.clone().unwrap_or((f64::NAN, f64::NAN));
    out.push(outcome("flat pentagon solve stays in the j-sphere", off, 1e-6));
    out.push(outcome("flat pentagon mirror length matches closed form", gap, 1e-4));

    out
}

/// Executes a command. JSON and CSV go to `--out` when given, otherwise to `stdout`.
pub fn run(cmd: Command, s: &Settings, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Pentagon => write_json(&pentagon_doc(&require_pentagon(s)?), s, stdout),
        Command::Solve => write_json(&solve_doc(s)?, s, stdout),
        Command::Sweep => run_sweep(s, stdout),
        Command::Close => run_close(s, stdout),
        Command::Lawson => {
            let ld = solve_lawson_disk(&solve_config(s)).map_err(solver)?;
            write_json(&lawson_doc(&ld), s, stdout)
        }
        Command::Assemble => write_json(&assemble_doc(s)?, s, stdout),
        Command::Check => {
            let results = run_checks(s);
            for r in &results {
                writeln!(
                    stdout,
                    "{} {} ({})",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                )?;
            }
            match results.iter().filter(|r| !r.passed).count() {
                0 => Ok(()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
        Command::Export => run_export(s),
    }
}
