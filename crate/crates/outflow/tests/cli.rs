//! End-to-end CLI tests: exit codes, config validation, artifact emission,
//! byte-identical reproducibility, and the resolved-config round trip.

use std::path::Path;
use std::process::Output;

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_outflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

const SUBSONIC_FAST: &str = r#"
[far_field]
mach_target = 0.7

[stationary]
seed = 0.05
n = 600

[transient]
t_end = 6.0
stride = 100

[perturbation]
a_u = 0.01
a_theta = 0.01
center = 5.0
width = 0.5
"#;

#[test]
fn unknown_key_is_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", "[far_field]\nmach_target = 0.7\nbogus = 1\n");
    let out = run(&["--config", &cfg, "analyze-eos"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn missing_config_is_config_error() {
    let out = run(&["--config", "/nonexistent/run.toml", "analyze-eos"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn positive_velocity_is_admissibility_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", "[far_field]\nu_plus = 0.5\n");
    let out = run(&["--config", &cfg, "stationary"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("no stationary solution"));
}

#[test]
fn oversized_seed_is_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.toml",
        "[far_field]\nmach_target = 0.7\n\n[stationary]\nseed = 0.5\n",
    );
    let out = run(&["--config", &cfg, "stationary"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn coarse_transonic_grid_is_numerical_failure() {
    let tmp = TempDir::new().unwrap();
    // Default transonic length with far too few nodes.
    let cfg = write_config(
        tmp.path(),
        "run.toml",
        "[far_field]\nmach_target = 1.0\n\n[stationary]\nn = 64\n",
    );
    let out = run(&["--config", &cfg, "stationary"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn minimal_config_defaults_are_echoed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", "[far_field]\nmach_target = 1.0\n");
    let outdir = tmp.path().join("out");
    let out = run(&["--config", &cfg, "--out", outdir.to_str().unwrap(), "analyze-eos"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let resolved = read(&outdir.join("resolved-config.toml"));
    // Defaults made explicit, and the Mach target converted to a velocity.
    assert!(resolved.contains("cfl = 0.8"), "{resolved}");
    assert!(resolved.contains("closure = \"ideal-polytropic\""), "{resolved}");
    assert!(resolved.contains("u_plus = -1.1832159566199"), "{resolved}");
    assert!(!resolved.contains("mach_target"), "{resolved}");
    // Artifacts present.
    assert!(outdir.join("conditions.json").exists());
    let summary = read(&outdir.join("summary.json"));
    assert!(summary.contains("\"passed\": true"), "{summary}");
}

#[test]
fn stationary_artifacts_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", SUBSONIC_FAST);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run(&["--config", &cfg, "--out", dir.to_str().unwrap(), "stationary"]);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
    }
    for name in ["profile.csv", "stationary.json", "summary.json"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs");
    }
    // Fixed-format floats: 17 significant digits, machine-parsable.
    let csv = read(&a.join("profile.csv"));
    let second_line = csv.lines().nth(1).unwrap();
    for field in second_line.split(',') {
        field.parse::<f64>().unwrap();
        assert!(field.contains('e'), "not in scientific notation: {field}");
    }
}

#[test]
fn resolved_config_round_trip_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", SUBSONIC_FAST);
    let a = tmp.path().join("a");
    let out = run(&["--config", &cfg, "--out", a.to_str().unwrap(), "stability"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let b = tmp.path().join("b");
    let resolved = a.join("resolved-config.toml");
    let out = run(&[
        "--config",
        resolved.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "stability",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    for name in ["series.csv", "energy.csv", "final-state.csv", "stability.json", "summary.json"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs");
    }
}

#[test]
fn stability_on_fast_config_converges() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", SUBSONIC_FAST);
    let outdir = tmp.path().join("out");
    let out = run(&["--config", &cfg, "--out", outdir.to_str().unwrap(), "stability"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS verdict_converging"), "{stdout}");
    let report = read(&outdir.join("stability.json"));
    assert!(report.contains("\"verdict\": \"Converging\""), "{report}");
}

#[test]
fn sweep_fans_out_to_subdirectories() {
    let tmp = TempDir::new().unwrap();
    let mut body = SUBSONIC_FAST.to_string();
    body = body.replace("t_end = 6.0", "t_end = 3.0");
    let cfg = write_config(tmp.path(), "run.toml", &body);
    let outdir = tmp.path().join("out");
    let out = run(&[
        "--config",
        &cfg,
        "--out",
        outdir.to_str().unwrap(),
        "--threads",
        "3",
        "sweep",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    for i in 0..3 {
        let sub = outdir.join(format!("run-{i}"));
        assert!(sub.join("stability.json").exists(), "missing run-{i}");
        assert!(sub.join("series.csv").exists());
    }
    assert!(outdir.join("sweep.json").exists());
}

#[test]
fn seed_randomizes_wave_phase_and_is_recorded() {
    let tmp = TempDir::new().unwrap();
    let body = SUBSONIC_FAST.replace("[perturbation]", "[perturbation]\nshape = \"decaying-wave\"");
    let cfg = write_config(tmp.path(), "run.toml", &body);
    let a = tmp.path().join("a");
    let out = run(&[
        "--config", &cfg, "--out", a.to_str().unwrap(), "--seed", "7", "stationary",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let resolved = read(&a.join("resolved-config.toml"));
    assert!(!resolved.contains("phase = 0.0"), "phase not randomized: {resolved}");
    // A different seed yields a different recorded phase.
    let b = tmp.path().join("b");
    let out = run(&[
        "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "8", "stationary",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let resolved_b = read(&b.join("resolved-config.toml"));
    let phase = |text: &str| {
        text.lines()
            .find(|l| l.starts_with("phase"))
            .unwrap()
            .to_string()
    };
    assert_ne!(phase(&resolved), phase(&resolved_b));
}
