use clap::{Args, Parser, Subcommand};
use s3forge_cli::config::{self, parse_angle, ConfigError, MeshFormat, Overrides, RawConfig};
use s3forge_cli::{run, CliError, Command};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "s3forge", version, about = "Minimal surfaces in S3 from geodesic pentagons")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Build a pentagon and print its vertices, arcs and residuals.
    Pentagon,
    /// Solve the Plateau problem on one pentagon and report its measurements.
    Solve,
    /// Solve over a parameter grid and write a CSV table.
    Sweep,
    /// Search for the parameters satisfying both closing conditions.
    Close,
    /// Solve the Plateau problem on the Lawson quadrilateral.
    Lawson,
    /// Assemble and verify the closed genus-2 surface.
    Assemble,
    /// Run runtime property checks and print PASS/FAIL lines.
    Check,
    /// Write a disk or the assembled surface as OBJ or PLY.
    Export,
}

#[derive(Debug, Args)]
struct Flags {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Edge length l in radians, or degrees with a `deg:` prefix.
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    l: Option<f64>,
    /// Angle ω in radians, or degrees with a `deg:` prefix.
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Parameter σ of the degenerate family.
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    sigma: Option<f64>,
    /// Level τ.
    #[arg(long, global = true, value_parser = parse_angle)]
    tau: Option<f64>,
    /// Boundary samples per edge on the coarsest mesh.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Number of meshes in the refinement ladder.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Iteration cap of the area minimization per mesh.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// Gradient tolerance of the area minimization.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed of the random samples drawn by `check`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mesh format of `export`: obj or ply.
    #[arg(long, global = true)]
    format: Option<MeshFormat>,
    /// Fail instead of rotating a mesh that touches the projection pole.
    #[arg(long = "no-prerotate", global = true)]
    no_prerotate: bool,
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(value) = std::env::var("S3FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::Value {
            key: "S3FORGE_THREADS".into(),
            value: value.clone(),
            reason: "expected a positive integer".into(),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::Value {
            key: "S3FORGE_THREADS".into(),
            value,
            reason: e.to_string(),
        })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let raw = match &cli.flags.config {
        Some(path) => config::load_config(path)?,
        None => RawConfig::default(),
    };
    let f = cli.flags;
    let overrides = Overrides {
        l: f.l,
        omega: f.omega,
        sigma: f.sigma,
        tau: f.tau,
        resolution: f.resolution,
        levels: f.levels,
        max_iter: f.max_iter,
        tol: f.tol,
        seed: f.seed,
        out: f.out,
        format: f.format,
        no_prerotate: f.no_prerotate,
    };
    let settings = config::resolve(&raw, &overrides)?;
    let command = match cli.command {
        Cmd::Pentagon => Command::Pentagon,
        Cmd::Solve => Command::Solve,
        Cmd::Sweep => Command::Sweep,
        Cmd::Close => Command::Close,
        Cmd::Lawson => Command::Lawson,
        Cmd::Assemble => Command::Assemble,
        Cmd::Check => Command::Check,
        Cmd::Export => Command::Export,
    };
    run(command, &settings, &mut std::io::stdout().lock())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("s3forge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
