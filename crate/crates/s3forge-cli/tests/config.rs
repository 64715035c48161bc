use s3forge_cli::config::*;
use std::f64::consts::PI;
use std::path::PathBuf;

#[test]
fn file_values_resolve_with_defaults() {
    let raw = parse_config("l = 1.2\nomega = deg:30\nresolution = 16\nformat = PLY\nprerotate = false\n").unwrap();
    let s = resolve(&raw, &Overrides::default()).unwrap();
    assert_eq!(s.l, Some(1.2));
    assert!((s.omega.unwrap() - PI / 6.0).abs() < 1e-15);
    assert_eq!(s.resolution, 16);
    assert_eq!(s.format, MeshFormat::Ply);
    assert!(!s.prerotate);
    let d = Settings::default();
    assert_eq!(
        (s.levels, s.max_iter, s.tol, s.seed),
        (d.levels, d.max_iter, d.tol, d.seed)
    );
    assert_eq!((s.l_tol, s.theta_tol, s.xtol), (5e-3, 5e-3, 1e-4));
}

#[test]
fn flags_take_precedence() {
    let raw = parse_config("l = 1.2\nlevels = 3\nout = a.json\n").unwrap();
    let flags = Overrides {
        l: Some(0.7),
        out: Some(PathBuf::from("b.json")),
        no_prerotate: true,
        ..Default::default()
    };
    let s = resolve(&raw, &flags).unwrap();
    assert_eq!(s.l, Some(0.7));
    assert_eq!(s.levels, 3);
    assert_eq!(s.out, Some(PathBuf::from("b.json")));
    assert!(!s.prerotate);
}

#[test]
fn grid_keys() {
    let raw =
        parse_config("l_min = 0.5\nl_max = 1.0\nl_steps = 4\nomega_steps = 2\nsigma_values = 0.3, deg:45\n").unwrap();
    let g = resolve(&raw, &Overrides::default()).unwrap().grid;
    assert_eq!((g.l, g.l_steps, g.omega_steps), ((0.5, 1.0), 4, 2));
    assert_eq!(g.sigma.len(), 2);
    assert!((g.sigma[1] - PI / 4.0).abs() < 1e-15);
}

#[test]
fn malformed_files_are_rejected() {
    assert!(matches!(
        parse_config("l 1.0\n"),
        Err(ConfigError::Syntax { line: 1, .. })
    ));
    assert!(matches!(parse_config("l =\n"), Err(ConfigError::Syntax { .. })));
    assert!(matches!(
        parse_config("l = 1\nl = 2\n"),
        Err(ConfigError::DuplicateKey { line: 2, .. })
    ));
    assert!(matches!(
        parse_config("# c\nfoo = 1\n"),
        Err(ConfigError::UnknownKey { line: 2, .. })
    ));
}

#[test]
fn values_are_range_checked() {
    let check = |text: &str| resolve(&parse_config(text).unwrap(), &Overrides::default());
    assert!(matches!(check("l = 4\n"), Err(ConfigError::Range { .. })));
    assert!(matches!(check("omega = 1.6\n"), Err(ConfigError::Range { .. })));
    assert!(matches!(check("resolution = 4\n"), Err(ConfigError::Range { .. })));
    assert!(matches!(check("levels = 0\n"), Err(ConfigError::Range { .. })));
    assert!(matches!(
        check("l_min = 1.2\nl_max = 0.8\n"),
        Err(ConfigError::Range { .. })
    ));
    assert!(matches!(check("tol = abc\n"), Err(ConfigError::Value { .. })));
    assert!(matches!(check("format = stl\n"), Err(ConfigError::Value { .. })));
    assert!(check("omega = -0.3\n").is_ok());
}

#[test]
fn angles_accept_degrees() {
    assert_eq!(parse_angle("0.25").unwrap(), 0.25);
    assert!((parse_angle("deg:90").unwrap() - PI / 2.0).abs() < 1e-15);
    assert!(parse_angle("inf").is_err());
    assert!(parse_angle("deg:x").is_err());
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_config(&PathBuf::from("/nonexistent/s3forge.cfg")).unwrap_err();
    assert!(matches!(err, ConfigError::Io { .. }));
}
