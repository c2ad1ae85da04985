use std::path::Path;
use std::process::{Command, Output};

fn weyl(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn config(dir: &Path, name: &str) -> String {
    let src = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    let dst = dir.join(name);
    std::fs::copy(src, &dst).unwrap();
    dst.to_str().unwrap().to_string()
}

#[test]
fn solve_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "curzon.toml");
    let o = weyl(dir.path(), &["solve", "--config", &cfg, "--n", "17"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let psi = std::fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    assert_eq!(psi.lines().count(), 1 + 17 * 17);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("residual_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["command"], "solve");
    assert_eq!(report["all_pass"], true);
}

#[test]
fn tight_residual_tolerance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "curzon.toml");
    let o = weyl(
        dir.path(),
        &[
            "solve",
            "--config",
            &cfg,
            "--n",
            "9",
            "--residual-tolerance",
            "1e-14",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_rejects_a_different_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "curzon.toml");
    assert_eq!(
        weyl(dir.path(), &["solve", "--config", &cfg, "--n", "9"])
            .status
            .code(),
        Some(0)
    );
    let psi = dir.path().join("psi.csv");
    let gamma = dir.path().join("gamma.csv");
    let o = weyl(
        dir.path(),
        &[
            "verify",
            "--config",
            &cfg,
            "--n",
            "11",
            "--psi",
            psi.to_str().unwrap(),
            "--gamma",
            gamma.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[domain]\nrho_min = 2.0\nrho_max = 1.0\n").unwrap();
    let o = weyl(dir.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn fluid_check_computes_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "fluid_dipole.toml");
    let o = weyl(dir.path(), &["fluid-check", "--config", &cfg, "--n", "17"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let c: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("certificate.json")).unwrap(),
    )
    .unwrap();
    assert!(c["measured_sup"].as_f64().unwrap() > 0.1);
    assert!(dir.path().join("defect.csv").exists());
}

#[test]
fn cylinder_zero_velocity_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = weyl(dir.path(), &["cylinder", "--radius", "1", "--v-r", "0"]);
    assert_eq!(o.status.code(), Some(4));
    let o = weyl(dir.path(), &["cylinder", "--radius", "1", "--v-r", "-0.5"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let profile = std::fs::read_to_string(dir.path().join("cylinder_profile.csv")).unwrap();
    assert!(profile.starts_with("rho,psi,gamma,v,g_tt,g_rr,g_zz,g_pp\n"));
    assert_eq!(profile.lines().count(), 101);
}

#[test]
fn couette_profile_hits_both_walls() {
    let dir = tempfile::tempdir().unwrap();
    let o = weyl(
        dir.path(),
        &[
            "couette",
            "--r1",
            "1",
            "--r2",
            "3",
            "--v1",
            "0",
            "--v2",
            "1",
            "--samples",
            "5",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows: Vec<Vec<f64>> = std::fs::read_to_string(dir.path().join("couette_profile.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][1], 0.0);
    assert!((rows[4][1] - 1.0).abs() < 1e-14);
}
