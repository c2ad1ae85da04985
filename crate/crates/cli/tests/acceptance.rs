//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.
//!
//! Run with `cargo test -p weyl-cli --test acceptance -- --nocapture`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::process::Command;
use weyl_core::cylinder::{
    branch_residuals, couette_literal, couette_newtonian, dichotomy_residual, sample_radii,
    CouetteBC, CylinderBC,
};
use weyl_core::elliptic::{solve_psi, SolverConfig};
use weyl_core::fluid::{nonexistence_certificate, FixedPointConfig, FluidParams};
use weyl_core::grid::{sample_boundary, Anchor, BoundaryTrace, MeridianGrid};
use weyl_core::pipeline::{solve_vacuum, VacuumSolve};
use weyl_core::quadrature::{path_difference, GradientFields, SourcePair};
use weyl_core::verify::PHI_PHI_LABEL;

fn curzon_psi(r: f64, z: f64) -> f64 {
    -1.0 / r.hypot(z)
}

fn curzon_gamma(r: f64, z: f64) -> f64 {
    let s = r * r + z * z;
    -r * r / (2.0 * s * s)
}

fn box_grid(n: usize) -> MeridianGrid {
    MeridianGrid::new(1.0, 2.0, 0.5, 1.5, n, n).unwrap()
}

fn report(id: usize, name: &str, pass: bool, detail: String) -> bool {
    println!(
        "criterion {id} {}: {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn criterion_1() -> bool {
    let err = |n: usize| {
        let g = box_grid(n);
        let b = sample_boundary(&g, curzon_psi, Anchor::at_node(&g, 0, 0, 0.0)).unwrap();
        let psi = solve_psi(&g, &b, &SolverConfig::default()).unwrap().psi;
        g.interior_nodes()
            .map(|(i, j)| (psi.at(i, j) - curzon_psi(g.rho(i), g.z(j))).abs())
            .fold(0.0, f64::max)
    };
    let (e33, e65) = (err(33), err(65));
    let ratio = e33 / e65;
    report(
        1,
        "manufactured-solution convergence",
        (3.2..=4.8).contains(&ratio),
        format!("err(33) {e33:.3e}, err(65) {e65:.3e}, ratio {ratio:.3}"),
    )
}

fn criterion_2() -> bool {
    let a = 0.5;
    let n = 65;
    let g = box_grid(n);
    let (i0, j0, g0) = (n / 2, n / 2, 0.25);
    let b = BoundaryTrace::LinearZ {
        slope: a,
        offset: 0.0,
    }
    .sample(&g, Anchor::at_node(&g, i0, j0, g0))
    .unwrap();
    let run = solve_vacuum(&g, &b, &SourcePair::Zero, &SolverConfig::default(), None).unwrap();
    let rho0 = g.rho(i0);
    let (mut psi_err, mut gamma_err) = (0.0f64, 0.0f64);
    for k in 0..g.len() {
        let (r, z) = g.coords(k);
        psi_err = psi_err.max((run.solution.psi().values()[k] - a * z).abs());
        let expect = g0 - a * a * (r * r - rho0 * rho0) / 2.0;
        gamma_err = gamma_err.max((run.solution.gamma().values()[k] - expect).abs());
    }
    report(
        2,
        "exact annihilation",
        psi_err <= 1e-9 && gamma_err <= 1e-8,
        format!("psi sup-error {psi_err:.3e}, gamma sup-error {gamma_err:.3e}"),
    )
}

fn curzon_run(n: usize) -> (MeridianGrid, Anchor, VacuumSolve) {
    let g = box_grid(n);
    let anchor = Anchor::at_node(&g, 0, 0, curzon_gamma(1.0, 0.5));
    let b = BoundaryTrace::Curzon { mass: 1.0 }
        .sample(&g, anchor)
        .unwrap();
    let run = solve_vacuum(&g, &b, &SourcePair::Zero, &SolverConfig::default(), None).unwrap();
    (g, anchor, run)
}

/// Green's theorem over the rectangle spanned by the anchor and node (i, j):
/// the cell-centred curl `G_ρ − F_z`, integrated cell by cell, oriented so
/// that it equals the ρ-first minus the z-first staircase integral.
fn green_integral(fields: &GradientFields, anchor: &Anchor, i: usize, j: usize) -> f64 {
    let g = fields.grid();
    let (f, gg) = (&fields.f, &fields.g);
    let (i_lo, i_hi) = (anchor.i.min(i), anchor.i.max(i));
    let (j_lo, j_hi) = (anchor.j.min(j), anchor.j.max(j));
    let mut total = 0.0;
    for jc in j_lo..j_hi {
        for ic in i_lo..i_hi {
            let (hr, hz) = (g.rho(ic + 1) - g.rho(ic), g.z(jc + 1) - g.z(jc));
            let g_rho =
                (gg.at(ic + 1, jc) + gg.at(ic + 1, jc + 1) - gg.at(ic, jc) - gg.at(ic, jc + 1))
                    / (2.0 * hr);
            let f_z = (f.at(ic, jc + 1) + f.at(ic + 1, jc + 1) - f.at(ic, jc) - f.at(ic + 1, jc))
                / (2.0 * hz);
            total += (g_rho - f_z) * hr * hz;
        }
    }
    let sign = |a: usize, b: usize| if a >= b { 1.0 } else { -1.0 };
    sign(i, anchor.i) * sign(j, anchor.j) * total
}

fn criterion_3() -> bool {
    let (g, anchor, run) = curzon_run(65);
    let tol = run.residuals.report.tolerance;
    let eq_pass = run
        .residuals
        .report
        .equations
        .iter()
        .take(4)
        .all(|e| e.pass);
    let diff = path_difference(&run.fields, &anchor);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let n = g.n_rho();
    let mut worst = 0.0f64;
    for _ in 0..16 {
        let i = rng.random_range(n / 2..n);
        let j = rng.random_range(n / 2..n);
        let lhs = diff.at(i, j);
        let rhs = green_integral(&run.fields, &anchor, i, j);
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    report(
        3,
        "vacuum pipeline end to end",
        eq_pass && run.all_pass() && worst <= 0.2,
        format!(
            "residual tolerance {tol:.3e}, sups [{}], worst path/Green mismatch {worst:.3e}",
            run.residuals
                .report
                .equations
                .iter()
                .map(|e| format!("{} {:.2e}", e.label, e.sup))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn criterion_4() -> bool {
    let g = MeridianGrid::new(1.0, 2.0, -0.5, 0.5, 65, 65).unwrap();
    let sources = SourcePair::Polynomial {
        coefficients: vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
    };
    let b = BoundaryTrace::Curzon { mass: 1.0 }
        .sample(&g, Anchor::at_node(&g, 0, 0, 0.0))
        .unwrap();
    let run = solve_vacuum(&g, &b, &sources, &SolverConfig::default(), None).unwrap();
    let phi = run.residuals.report.get(PHI_PHI_LABEL).unwrap();
    report(
        4,
        "generalized sources",
        run.analyticity.certified && phi.pass,
        format!(
            "analyticity r1 {:.2e} r2 {:.2e} (threshold {:.2e}), phi_phi sup {:.2e} (tolerance {:.2e})",
            run.analyticity.r1_sup,
            run.analyticity.r2_sup,
            run.analyticity.threshold,
            phi.sup,
            run.residuals.report.tolerance
        ),
    )
}

fn criterion_5() -> bool {
    let cert = |n: usize, eps: f64| {
        let g = MeridianGrid::new(1.0, 2.0, -0.5, 0.5, n, n).unwrap();
        let b = BoundaryTrace::Dipole { moment: 1.0 }
            .sample(&g, Anchor::at_node(&g, 0, 0, 0.0))
            .unwrap();
        nonexistence_certificate(
            &g,
            &b,
            &FluidParams::new(eps, 1.0).unwrap(),
            &SolverConfig::default(),
            &FixedPointConfig::default(),
        )
        .unwrap()
        .report
    };
    let (c33, c65) = (cert(33, 1.0), cert(65, 1.0));
    let ratio = &c65.ratio_to_predicted;
    let ratio_ok = c33.ratio_to_predicted.all_within_band() && ratio.all_within_band();
    let persists = c65.measured_sup >= 0.8 * c33.measured_sup;
    let (v33, v65) = (cert(33, 0.0), cert(65, 0.0));
    let shrink = v33.measured_sup / v65.measured_sup;
    println!(
        "  measured/predicted at 65: {} of {} nodes in band, min {:.4} max {:.4}",
        ratio.within_band, ratio.nodes, ratio.min, ratio.max
    );
    println!(
        "  measured/derived (K eps e^(2gamma-2psi) rho psi_z, opposite sign): min {:.4} max {:.4}",
        c65.ratio_to_derived.min, c65.ratio_to_derived.max
    );
    report(
        5,
        "non-existence certificate",
        ratio_ok && persists && shrink >= 3.2,
        format!(
            "ratio in band {ratio_ok}, defect sup 33 {:.3e} -> 65 {:.3e}, vacuum shrink factor {shrink:.3}",
            c33.measured_sup, c65.measured_sup
        ),
    )
}

/// RK4 for `v'' + v'/ρ = 0` started at `(R₁, v₁, slope)`.
fn rk4(bc: &CouetteBC, slope: f64, radii: &[f64]) -> Vec<f64> {
    let (mut r, mut v, mut dv) = (bc.r1, bc.v1, slope);
    let rhs = |r: f64, dv: f64| -dv / r;
    radii
        .iter()
        .map(|&target| {
            let steps = 2000;
            let h = (target - r) / steps as f64;
            for _ in 0..steps {
                let (k1v, k1d) = (dv, rhs(r, dv));
                let (k2v, k2d) = (dv + h / 2.0 * k1d, rhs(r + h / 2.0, dv + h / 2.0 * k1d));
                let (k3v, k3d) = (dv + h / 2.0 * k2d, rhs(r + h / 2.0, dv + h / 2.0 * k2d));
                let (k4v, k4d) = (dv + h * k3d, rhs(r + h, dv + h * k3d));
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                dv += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
                r += h;
            }
            r = target;
            v
        })
        .collect()
}

fn shoot(bc: &CouetteBC, radii: &[f64]) -> Vec<f64> {
    let mut pts = radii.to_vec();
    pts.push(bc.r2);
    let (a, b) = (rk4(bc, 0.0, &pts), rk4(bc, 1.0, &pts));
    let last = pts.len() - 1;
    let s = (bc.v2 - a[last]) / (b[last] - a[last]);
    let mut v = rk4(bc, s, &pts);
    v.pop();
    v
}

fn criterion_6() -> bool {
    let radius = 1.0;
    let bc = CylinderBC::new(radius, 0.7, 0.2, -0.3).unwrap();
    let radii = sample_radii(radius, 10.0 * radius, 100);
    let branch = branch_residuals(1.0, &bc, &radii, 1e-12).unwrap();
    let worst_branch = branch.equations.iter().map(|e| e.sup).fold(0.0, f64::max);

    let mut zeros = Vec::new();
    for k in 0..=400 {
        let k1 = -2.0 + 0.01 * k as f64;
        if dichotomy_residual(k1, &radii) <= 1e-12 {
            zeros.push(k1);
        }
    }
    let sweep_ok = zeros.len() == 2 && zeros[0].abs() < 1e-9 && (zeros[1] - 1.0).abs() < 1e-9;

    let cbc = CouetteBC::new(1.0, 4.0, -0.5, 2.0).unwrap();
    let prof = couette_newtonian(&cbc).unwrap();
    let c_radii = sample_radii(cbc.r1, cbc.r2, 50);
    let shoot_err = c_radii
        .iter()
        .zip(shoot(&cbc, &c_radii))
        .map(|(r, v)| (prof.v(*r) - v).abs())
        .fold(0.0, f64::max);
    let wall_err = (prof.v(cbc.r2) - cbc.v2).abs();
    let literal_inner = couette_literal(&cbc, cbc.r1);
    let literal_outer = couette_literal(&cbc, cbc.r2);
    println!(
        "  literal Couette formula: v(R1) = {literal_inner} (want {}), v(R2) = {literal_outer} (want {})",
        cbc.v1, cbc.v2
    );
    report(
        6,
        "cylinder closed forms",
        branch.all_pass && sweep_ok && shoot_err <= 1e-10 && wall_err <= 1e-14,
        format!(
            "k1 = 1 residual sup {worst_branch:.2e}, sweep zeros {zeros:?}, Couette vs shooting {shoot_err:.2e}, v(R2) error {wall_err:.2e}"
        ),
    )
}

const CONFIG: &str = r#"
[domain]
rho_min = 1.0
rho_max = 2.0
z_min = 0.5
z_max = 1.5
n_rho = 33
n_z = 33

[boundary]
kind = "curzon"
mass = 1.0

[anchor]
rho = 2.0
z = 1.5
gamma = -0.0703125
"#;

fn weyl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_weyl"))
        .args(args)
        .output()
        .unwrap()
}

fn residual_norms(path: &Path) -> Vec<(String, f64, f64)> {
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["residuals"]["equations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["label"].as_str().unwrap().to_string(),
                e["sup"].as_f64().unwrap(),
                e["rms"].as_f64().unwrap(),
            )
        })
        .collect()
}

fn criterion_7() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("curzon.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let cfg = cfg.to_str().unwrap();
    let (a, b, v) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("v"),
    );
    let mut codes = Vec::new();
    for out in [&a, &b] {
        codes.push(
            weyl(&[
                "--output-dir",
                out.to_str().unwrap(),
                "solve",
                "--config",
                cfg,
            ])
            .status
            .code(),
        );
    }
    let files = ["psi.csv", "gamma.csv", "residual_report.json"];
    let identical = files
        .iter()
        .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap());
    let psi = a.join("psi.csv");
    let gamma = a.join("gamma.csv");
    codes.push(
        weyl(&[
            "--output-dir",
            v.to_str().unwrap(),
            "verify",
            "--config",
            cfg,
            "--psi",
            psi.to_str().unwrap(),
            "--gamma",
            gamma.to_str().unwrap(),
        ])
        .status
        .code(),
    );
    let solved = residual_norms(&a.join("residual_report.json"));
    let verified = residual_norms(&v.join("verify_report.json"));
    let round_trip = !solved.is_empty() && solved == verified;
    report(
        7,
        "determinism and round trip",
        codes.iter().all(|c| *c == Some(0)) && identical && round_trip,
        format!("exit codes {codes:?}, byte-identical {identical}, residual norms identical {round_trip}"),
    )
}

#[test]
fn acceptance() {
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, p)| !**p)
        .map(|(k, _)| k + 1)
        .collect();
    println!(
        "acceptance: {} of {} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
