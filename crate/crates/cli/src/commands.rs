use crate::config::{Overrides, Problem, RunConfig};
use crate::error::{CliError, EXIT_OK, EXIT_RESIDUAL};
use crate::output::{
    fmt, prepare_dir, read_field, write_csv, write_field, write_fields, write_json,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use weyl_core::cylinder::{
    branch_residuals, couette_newtonian, radial_profile, sample_radii, solve_cylinder, Branch,
    CouetteBC, CylinderBC,
};
use weyl_core::elliptic::{SolveOutcome, SolverMethod};
use weyl_core::fluid::{nonexistence_certificate, CertificateReport};
use weyl_core::grid::{Anchor, MeridianGrid};
use weyl_core::pipeline::solve_vacuum;
use weyl_core::quadrature::{path_independence_check, AnalyticityReport, ExactnessReport};
use weyl_core::verify::{
    default_residual_tolerance, einstein_components, generalized_residuals, ResidualReport,
    WeylSolution,
};

/// What a command produced: its exit status and the files it wrote.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub rho_min: f64,
    pub rho_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub n_rho: usize,
    pub n_z: usize,
    pub h_rho: f64,
    pub h_z: f64,
}

impl From<&MeridianGrid> for GridSummary {
    fn from(g: &MeridianGrid) -> Self {
        Self {
            rho_min: g.rho_min(),
            rho_max: g.rho_max(),
            z_min: g.z_min(),
            z_max: g.z_max(),
            n_rho: g.n_rho(),
            n_z: g.n_z(),
            h_rho: g.h_rho(),
            h_z: g.h_z(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnchorSummary {
    pub rho: f64,
    pub z: f64,
    pub gamma: f64,
    pub snap_distance: f64,
}

impl From<&Anchor> for AnchorSummary {
    fn from(a: &Anchor) -> Self {
        Self {
            rho: a.rho,
            z: a.z,
            gamma: a.gamma,
            snap_distance: a.snap_distance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub method: SolverMethod,
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub threshold: f64,
    pub error_bound: f64,
    pub error_threshold: f64,
    pub converged: bool,
}

impl SolverSummary {
    fn new(method: SolverMethod, o: &SolveOutcome) -> Self {
        Self {
            method,
            iterations: o.iterations,
            initial_residual: o.initial_residual,
            final_residual: o.final_residual,
            threshold: o.threshold,
            error_bound: o.error_bound,
            error_threshold: o.error_threshold,
            converged: o.converged,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessSummary {
    pub sup_norm: f64,
    pub rms_norm: f64,
    pub threshold: f64,
    pub integrable: bool,
}

impl From<&ExactnessReport> for ExactnessSummary {
    fn from(e: &ExactnessReport) -> Self {
        Self {
            sup_norm: e.sup_norm,
            rms_norm: e.rms_norm,
            threshold: e.threshold,
            integrable: e.integrable,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub grid: GridSummary,
    pub anchor: AnchorSummary,
    pub solver: SolverSummary,
    pub residuals: ResidualReport,
    pub exactness: ExactnessSummary,
    pub analyticity: AnalyticityReport,
    /// Sup-norm difference between the ρ-first and z-first staircases.
    pub path_independence: f64,
    pub failures: Vec<String>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub grid: GridSummary,
    pub residuals: ResidualReport,
    pub failures: Vec<String>,
    pub all_pass: bool,
}

fn load(config: &Path, overrides: &Overrides) -> Result<Problem, CliError> {
    let mut c = RunConfig::load(config)?;
    c.apply(overrides);
    c.problem()
}

fn failed_equations(r: &ResidualReport) -> Vec<String> {
    r.equations
        .iter()
        .filter(|e| !e.pass)
        .map(|e| e.label.clone())
        .collect()
}

fn status(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_RESIDUAL
    }
}

fn residual_lines(r: &ResidualReport) -> String {
    let mut s = format!("residual tolerance {}\n", fmt(r.tolerance));
    for e in &r.equations {
        s.push_str(&format!(
            "  {:<24} sup {}  rms {}  {}\n",
            e.label,
            fmt(e.sup),
            fmt(e.rms),
            if e.pass { "pass" } else { "FAIL" }
        ));
    }
    s
}

/// ψ by the elliptic solve, γ by quadrature, then residuals of the full
/// system. Writes `psi.csv`, `gamma.csv` and `residual_report.json`.
pub fn cmd_solve(
    config: &Path,
    overrides: &Overrides,
    out: &Path,
) -> Result<CommandOutcome, CliError> {
    let p = load(config, overrides)?;
    let run = solve_vacuum(
        &p.grid,
        &p.boundary,
        &p.sources,
        &p.solver,
        p.residual_tolerance,
    )?;
    let dir = prepare_dir(out)?;
    let mut failures = failed_equations(&run.residuals.report);
    if !run.exactness.integrable {
        failures.push("exactness".into());
    }
    if !run.analyticity.certified {
        failures.push("analyticity".into());
    }
    let report = SolveReport {
        command: "solve",
        grid: (&p.grid).into(),
        anchor: p.boundary.anchor().into(),
        solver: SolverSummary::new(p.solver.method, &run.outcome),
        residuals: run.residuals.report.clone(),
        exactness: (&run.exactness).into(),
        analyticity: run.analyticity,
        path_independence: path_independence_check(&run.fields, p.boundary.anchor()),
        all_pass: failures.is_empty(),
        failures,
    };
    let files = vec![
        dir.join("psi.csv"),
        dir.join("gamma.csv"),
        dir.join("residual_report.json"),
    ];
    write_field(&files[0], run.solution.psi())?;
    write_field(&files[1], run.solution.gamma())?;
    write_json(&files[2], &report)?;
    let mut summary = format!(
        "solve: {} iterations, exactness {} (threshold {}), analyticity {}\n",
        run.outcome.iterations,
        fmt(run.exactness.sup_norm),
        fmt(run.exactness.threshold),
        if run.analyticity.certified {
            "certified"
        } else {
            "FAILED"
        }
    );
    summary.push_str(&residual_lines(&report.residuals));
    Ok(CommandOutcome {
        code: status(report.all_pass),
        summary,
        files,
    })
}

/// Residuals and Einstein components of given ψ and γ files on the declared
/// grid. Writes `verify_report.json` and `einstein.csv`.
pub fn cmd_verify(
    config: &Path,
    psi: &Path,
    gamma: &Path,
    overrides: &Overrides,
    out: &Path,
) -> Result<CommandOutcome, CliError> {
    let p = load(config, overrides)?;
    let solution = WeylSolution::new(
        read_field(psi, &p.grid, "psi")?,
        read_field(gamma, &p.grid, "gamma")?,
    )?;
    let tolerance = p
        .residual_tolerance
        .unwrap_or_else(|| default_residual_tolerance(&solution));
    let residuals = generalized_residuals(&solution, &p.sources, tolerance)?;
    let einstein = einstein_components(&solution)?;
    let dir = prepare_dir(out)?;
    let failures = failed_equations(&residuals.report);
    let report = VerifyReport {
        command: "verify",
        grid: (&p.grid).into(),
        residuals: residuals.report,
        all_pass: failures.is_empty(),
        failures,
    };
    let files = vec![dir.join("verify_report.json"), dir.join("einstein.csv")];
    write_json(&files[0], &report)?;
    let (g11p, g11m) = (einstein.g11_plus(), einstein.g11_minus());
    write_fields(
        &files[1],
        &[
            &einstein.g11_bracket,
            &g11p,
            &g11m,
            &einstein.g22,
            &einstein.g23,
            &einstein.g33,
            &einstein.g44,
        ],
    )?;
    Ok(CommandOutcome {
        code: status(report.all_pass),
        summary: format!("verify:\n{}", residual_lines(&report.residuals)),
        files,
    })
}

/// The hydrostatic non-existence certificate. Exit 0 means the certificate
/// was computed, not that a solution exists.
pub fn cmd_fluid_check(
    config: &Path,
    overrides: &Overrides,
    out: &Path,
) -> Result<CommandOutcome, CliError> {
    let p = load(config, overrides)?;
    let c = nonexistence_certificate(&p.grid, &p.boundary, &p.fluid, &p.solver, &p.fixed_point)?;
    let dir = prepare_dir(out)?;
    let files = vec![
        dir.join("certificate.json"),
        dir.join("psi.csv"),
        dir.join("gamma.csv"),
        dir.join("defect.csv"),
    ];
    write_json(&files[0], &c.report)?;
    write_field(&files[1], c.solution.psi())?;
    write_field(&files[2], c.solution.gamma())?;
    write_fields(&files[3], &[&c.measured, &c.predicted, &c.derived])?;
    Ok(CommandOutcome {
        code: EXIT_OK,
        summary: certificate_summary(&c.report),
        files,
    })
}

fn certificate_summary(r: &CertificateReport) -> String {
    let ratio = |s: &weyl_core::fluid::RatioSummary| {
        format!(
            "{} nodes, min {:.4} max {:.4} mean {:.4}, {} in [0.8, 1.2]",
            s.nodes, s.min, s.max, s.mean, s.within_band
        )
    };
    format!(
        "fluid-check: epsilon {} K {}, {} fixed-point sweeps\n  \
         measured sup {}  predicted sup {}  derived sup {}\n  \
         measured/predicted: {}\n  measured/derived: {}\n  degenerate: {}\n",
        r.epsilon,
        r.coupling,
        r.fixed_point_iterations,
        fmt(r.measured_sup),
        fmt(r.predicted_sup),
        fmt(r.derived_sup),
        ratio(&r.ratio_to_predicted),
        ratio(&r.ratio_to_derived),
        r.degenerate
    )
}

pub const PROFILE_HEADER: [&str; 8] = ["rho", "psi", "gamma", "v", "g_tt", "g_rr", "g_zz", "g_pp"];

/// Tolerance for the closed-form residuals.
pub const CYLINDER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CylinderReport {
    pub command: &'static str,
    pub boundary: CylinderBC,
    pub branch: Branch,
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
    pub pressure: f64,
    pub epsilon: f64,
    pub radii: (f64, f64, usize),
    pub residuals: ResidualReport,
}

#[derive(Debug, Clone, Copy)]
pub struct CylinderArgs {
    pub radius: f64,
    pub v_r: f64,
    pub psi_r: f64,
    pub gamma_r: f64,
    pub samples: usize,
    /// Profiles run over `[R, outer · R]`.
    pub outer: f64,
}

pub fn cmd_cylinder(args: &CylinderArgs, out: &Path) -> Result<CommandOutcome, CliError> {
    let bc = CylinderBC::new(args.radius, args.v_r, args.psi_r, args.gamma_r)?;
    let s = solve_cylinder(&bc)?;
    if !(args.outer > 1.0 && args.outer.is_finite()) || args.samples < 2 {
        return Err(CliError::Config(
            "need --outer > 1 and --samples >= 2".into(),
        ));
    }
    let radii = sample_radii(bc.radius, args.outer * bc.radius, args.samples);
    let rows = radial_profile(&s, &radii)?;
    let residuals = branch_residuals(s.k1, &bc, &radii, CYLINDER_TOLERANCE)?;
    let dir = prepare_dir(out)?;
    let files = vec![
        dir.join("cylinder_profile.csv"),
        dir.join("cylinder_report.json"),
    ];
    write_csv(
        &files[0],
        &PROFILE_HEADER,
        rows.iter().map(|r| {
            [r.rho, r.psi, r.gamma, r.v, r.g_tt, r.g_rr, r.g_zz, r.g_pp]
                .iter()
                .map(|v| fmt(*v))
                .collect()
        }),
    )?;
    let report = CylinderReport {
        command: "cylinder",
        boundary: bc,
        branch: s.branch,
        k1: s.k1,
        k2: s.k2,
        c: s.c,
        pressure: s.pressure,
        epsilon: s.epsilon,
        radii: (radii[0], radii[radii.len() - 1], radii.len()),
        residuals,
    };
    write_json(&files[1], &report)?;
    Ok(CommandOutcome {
        code: status(report.residuals.all_pass),
        summary: format!(
            "cylinder: psi = {} log rho + {}, gamma = psi + {}, v = {}\n{}",
            s.k1,
            fmt(s.k2),
            fmt(s.c),
            s.v_r,
            residual_lines(&report.residuals)
        ),
        files,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CouetteReport {
    pub command: &'static str,
    pub boundary: CouetteBC,
    pub inner_wall_error: f64,
    pub outer_wall_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CouetteArgs {
    pub r1: f64,
    pub r2: f64,
    pub v1: f64,
    pub v2: f64,
    pub samples: usize,
}

pub fn cmd_couette(args: &CouetteArgs, out: &Path) -> Result<CommandOutcome, CliError> {
    let bc = CouetteBC::new(args.r1, args.r2, args.v1, args.v2)?;
    if args.samples < 2 {
        return Err(CliError::Config("need --samples >= 2".into()));
    }
    let p = couette_newtonian(&bc)?;
    let radii = sample_radii(bc.r1, bc.r2, args.samples);
    let dir = prepare_dir(out)?;
    let files = vec![
        dir.join("couette_profile.csv"),
        dir.join("couette_report.json"),
    ];
    write_csv(
        &files[0],
        &["rho", "v"],
        radii.iter().map(|&r| vec![fmt(r), fmt(p.v(r))]),
    )?;
    let report = CouetteReport {
        command: "couette",
        boundary: bc,
        inner_wall_error: (p.v(bc.r1) - bc.v1).abs(),
        outer_wall_error: (p.v(bc.r2) - bc.v2).abs(),
    };
    write_json(&files[1], &report)?;
    Ok(CommandOutcome {
        code: EXIT_OK,
        summary: format!(
            "couette: v = {} + ({}) log(rho/{}) / log({}/{})\n",
            bc.v1,
            bc.v2 - bc.v1,
            bc.r1,
            bc.r2,
            bc.r1
        ),
        files,
    })
}
