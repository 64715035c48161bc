//! Line-oriented `key = value` configuration with flag overrides.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Configuration errors. All of them map to exit status 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("{key}: cannot parse {value:?}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{key} = {value} outside {range}")]
    Range {
        key: String,
        value: String,
        range: &'static str,
    },
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("{0}")]
    Missing(String),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Keys accepted in configuration files.
pub const KNOWN_KEYS: &[&str] = &[
    "l",
    "omega",
    "sigma",
    "tau",
    "resolution",
    "levels",
    "max_iter",
    "tol",
    "seed",
    "out",
    "format",
    "prerotate",
    "l_tol",
    "theta_tol",
    "xtol",
    "l_min",
    "l_max",
    "l_steps",
    "omega_min",
    "omega_max",
    "omega_steps",
    "sigma_values",
];

/// Raw entries of a configuration file with their line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, (String, usize)>,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: content.to_string(),
            });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        if raw
            .entries
            .insert(key.to_string(), (value.to_string(), line_no))
            .is_some()
        {
            return Err(ConfigError::DuplicateKey {
                line: line_no,
                key: key.to_string(),
            });
        }
    }
    Ok(raw)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_config(&text)
}

/// Parses an angle in radians, or in degrees after a `deg:` prefix.
pub fn parse_angle(value: &str) -> std::result::Result<f64, String> {
    let v = value.trim();
    let (text, scale) = match v.strip_prefix("deg:") {
        Some(rest) => (rest.trim(), PI / 180.0),
        None => (v, 1.0),
    };
    let x: f64 = text.parse().map_err(|e| format!("{e}"))?;
    if !x.is_finite() {
        return Err("value is not finite".into());
    }
    Ok(x * scale)
}

fn value_error(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

/// Output format of mesh exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl std::str::FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            other => Err(format!("unknown format `{other}`, expected obj or ply")),
        }
    }
}

/// Sweep grid: a row-major (l, ω) grid and a list of σ values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub l: (f64, f64),
    pub l_steps: usize,
    pub omega: (f64, f64),
    pub omega_steps: usize,
    pub sigma: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            l: (0.6, 1.4),
            l_steps: 3,
            omega: (0.2, 1.2),
            omega_steps: 3,
            sigma: Vec::new(),
        }
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub l: Option<f64>,
    pub omega: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub resolution: usize,
    pub levels: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: MeshFormat,
    pub prerotate: bool,
    pub l_tol: f64,
    pub theta_tol: f64,
    pub xtol: f64,
    pub grid: GridSpec,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            l: None,
            omega: None,
            sigma: None,
            tau: None,
            resolution: 24,
            levels: 2,
            max_iter: 4000,
            tol: 1e-8,
            seed: 0,
            out: None,
            format: MeshFormat::Obj,
            prerotate: true,
            l_tol: 5e-3,
            theta_tol: 5e-3,
            xtol: 1e-4,
            grid: GridSpec::default(),
        }
    }
}

/// Values given on the command line; they override the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub l: Option<f64>,
    pub omega: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub resolution: Option<usize>,
    pub levels: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<MeshFormat>,
    pub no_prerotate: bool,
}

fn get_angle(raw: &RawConfig, key: &str) -> Result<Option<f64>> {
    raw.entries
        .get(key)
        .map(|(v, _)| parse_angle(v).map_err(|e| value_error(key, v, e)))
        .transpose()
}

fn get_parsed<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    raw.entries
        .get(key)
        .map(|(v, _)| v.parse::<T>().map_err(|e| value_error(key, v, e.to_string())))
        .transpose()
}

fn check(key: &str, value: f64, ok: bool, range: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range {
            key: key.to_string(),
            value: value.to_string(),
            range,
        })
    }
}

/// Merges file entries, flag overrides and defaults, then range-checks every value.
pub fn resolve(raw: &RawConfig, flags: &Overrides) -> Result<Settings> {
    let mut s = Settings::default();
    s.l = flags.l.or(get_angle(raw, "l")?);
    s.omega = flags.omega.or(get_angle(raw, "omega")?);
    s.sigma = flags.sigma.or(get_angle(raw, "sigma")?);
    s.tau = flags.tau.or(get_angle(raw, "tau")?);
    if let Some(v) = flags.resolution.or(get_parsed(raw, "resolution")?) {
        s.resolution = v;
    }
    if let Some(v) = flags.levels.or(get_parsed(raw, "levels")?) {
        s.levels = v;
    }
    if let Some(v) = flags.max_iter.or(get_parsed(raw, "max_iter")?) {
        s.max_iter = v;
    }
    if let Some(v) = flags.tol.or(get_parsed(raw, "tol")?) {
        s.tol = v;
    }
    if let Some(v) = flags.seed.or(get_parsed(raw, "seed")?) {
        s.seed = v;
    }
    s.out = flags
        .out
        .clone()
        .or_else(|| raw.entries.get("out").map(|(v, _)| PathBuf::from(v)));
    if let Some(v) = flags.format.or(get_parsed(raw, "format")?) {
        s.format = v;
    }
    s.prerotate = !flags.no_prerotate && get_parsed::<bool>(raw, "prerotate")?.unwrap_or(true);
    for (key, slot) in [
        ("l_tol", &mut s.l_tol),
        ("theta_tol", &mut s.theta_tol),
        ("xtol", &mut s.xtol),
    ] {
        if let Some(v) = get_parsed(raw, key)? {
            *slot = v;
        }
    }
    let g = &mut s.grid;
    if let Some(v) = get_angle(raw, "l_min")? {
        g.l.0 = v;
    }
    if let Some(v) = get_angle(raw, "l_max")? {
        g.l.1 = v;
    }
    if let Some(v) = get_angle(raw, "omega_min")? {
        g.omega.0 = v;
    }
    if let Some(v) = get_angle(raw, "omega_max")? {
        g.omega.1 = v;
    }
    if let Some(v) = get_parsed(raw, "l_steps")? {
        g.l_steps = v;
    }
    if let Some(v) = get_parsed(raw, "omega_steps")? {
        g.omega_steps = v;
    }
    if let Some((v, _)) = raw.entries.get("sigma_values") {
        g.sigma = v
            .split(',')
            .map(|x| parse_angle(x).map_err(|e| value_error("sigma_values", x, e)))
            .collect::<Result<_>>()?;
    }
    validate(&s)?;
    Ok(s)
}

fn validate(s: &Settings) -> Result<()> {
    if let Some(l) = s.l {
        check("l", l, l > 0.0 && l < PI, "(0, pi)")?;
    }
    if let Some(w) = s.omega {
        check("omega", w, w.abs() < FRAC_PI_2, "(-pi/2, pi/2)")?;
    }
    if let Some(x) = s.sigma {
        check("sigma", x, x.abs() <= FRAC_PI_2, "[-pi/2, pi/2]")?;
    }
    if let Some(t) = s.tau {
        check("tau", t, t > 0.0 && t < FRAC_PI_2, "(0, pi/2)")?;
    }
    check(
        "resolution",
        s.resolution as f64,
        (8..=256).contains(&s.resolution),
        "[8, 256]",
    )?;
    check("levels", s.levels as f64, (1..=5).contains(&s.levels), "[1, 5]")?;
    check("max_iter", s.max_iter as f64, s.max_iter >= 1, "[1, inf)")?;
    for (key, v) in [
        ("tol", s.tol),
        ("l_tol", s.l_tol),
        ("theta_tol", s.theta_tol),
        ("xtol", s.xtol),
    ] {
        check(key, v, v > 0.0 && v < 1.0, "(0, 1)")?;
    }
    let g = &s.grid;
    check("l_min", g.l.0, g.l.0 > 0.0 && g.l.0 <= g.l.1, "(0, l_max]")?;
    check("l_max", g.l.1, g.l.1 < PI, "[l_min, pi)")?;
    check(
        "omega_min",
        g.omega.0,
        g.omega.0 > -FRAC_PI_2 && g.omega.0 <= g.omega.1,
        "(-pi/2, omega_max]",
    )?;
    check("omega_max", g.omega.1, g.omega.1 < FRAC_PI_2, "[omega_min, pi/2)")?;
    check(
        "l_steps",
        g.l_steps as f64,
        (1..=1000).contains(&g.l_steps),
        "[1, 1000]",
    )?;
    check(
        "omega_steps",
        g.omega_steps as f64,
        (1..=1000).contains(&g.omega_steps),
        "[1, 1000]",
    )?;
    for &x in &g.sigma {
        check("sigma_values", x, x.abs() <= FRAC_PI_2, "[-pi/2, pi/2]")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let raw = parse_config("# header\n\nl = 1.0  # trailing\nomega=deg:45\n").unwrap();
        let s = resolve(&raw, &Overrides::default()).unwrap();
        assert_eq!(s.l, Some(1.0));
        assert!((s.omega.unwrap() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config("l = 1\n\nbogus = 2\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 3,
                key: "bogus".into()
            }
        );
    }

    #[test]
    fn flags_override_file() {
        let raw = parse_config("resolution = 16\n").unwrap();
        let flags = Overrides {
            resolution: Some(32),
            ..Default::default()
        };
        assert_eq!(resolve(&raw, &flags).unwrap().resolution, 32);
    }

    #[test]
    fn range_violation() {
        let raw = parse_config("omega = 2.0\n").unwrap();
        assert!(matches!(
            resolve(&raw, &Overrides::default()),
            Err(ConfigError::Range { .. })
        ));
    }
}
