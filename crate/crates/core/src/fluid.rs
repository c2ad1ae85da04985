//! Hydrostatic fluid in the Weyl metric.
//!
//! With the fluid at rest the ρρ and zz equations have exact negatives as
//! left-hand sides and the same right-hand side `K p e^{2γ−2ψ}`, so `p = 0`.
//! What is left is the vacuum system plus an energy term in the tt equation,
//! `−2Δψ = Kε e^{2γ−2ψ}`. The gradient pair `(F, G)` of γ then has a nonzero
//! curl wherever `ψ_z ≠ 0`, so no γ exists for `ε ≠ 0`. The certificate below
//! produces a candidate ψ by a fixed-point sweep and measures that curl.

use crate::diff;
use crate::elliptic::{solve_poisson_from, solve_psi, SolveError, SolverConfig};
use crate::grid::{BoundaryData, MeridianGrid, ScalarField};
use crate::pipeline::{solve_vacuum, PipelineError, VacuumSolve};
use crate::quadrature::{
    build_gradient_fields, curl_defect, integrate_gamma, GradientFields, QuadratureError,
    SourcePair,
};
use crate::verify::{
    default_residual_tolerance, require_resolution, LocalDerivatives, ResidualReport, VerifyError,
    WeylSolution,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FluidError {
    #[error("invalid fluid parameters: {0}")]
    InvalidParams(String),
    #[error("fixed-point sweep did not settle after {} iterations (last change {last})", history.len())]
    FixedPointDiverged {
        history: Vec<FixedPointStep>,
        last: f64,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FluidParams {
    pub epsilon: f64,
    /// `8πG/c⁴`; 1 in geometrized units.
    pub coupling: f64,
    /// Carried along for the moving-fluid case; a fluid at rest never sees it.
    pub viscosity: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            coupling: 1.0,
            viscosity: 0.0,
        }
    }
}

impl FluidParams {
    pub fn new(epsilon: f64, coupling: f64) -> Result<Self, FluidError> {
        let p = Self {
            epsilon,
            coupling,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FluidError> {
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(FluidError::InvalidParams(format!(
                "coupling must be positive, got {}",
                self.coupling
            )));
        }
        if !self.epsilon.is_finite() {
            return Err(FluidError::InvalidParams("epsilon must be finite".into()));
        }
        if !self.viscosity.is_finite() {
            return Err(FluidError::InvalidParams("viscosity must be finite".into()));
        }
        Ok(())
    }
}

/// The pressure of a fluid at rest. Adding the ρρ and zz equations leaves
/// `2Kp e^{2γ−2ψ} = 0`.
pub fn hydrostatic_pressure() -> f64 {
    0.0
}

/// Left-hand sides of the ρρ and zz equations minus their common right-hand
/// side at `p = 0`, on interior nodes. The two fields are exact negatives.
pub fn hydrostatic_residuals(solution: &WeylSolution) -> (ScalarField, ScalarField) {
    let grid = *solution.grid();
    let p = hydrostatic_pressure();
    let mut rr = vec![0.0; grid.len()];
    let mut zz = vec![0.0; grid.len()];
    for (i, j) in grid.interior_nodes() {
        let k = grid.index(i, j);
        let d = LocalDerivatives::at(solution, i, j);
        let lhs = d.rho_rho();
        rr[k] = lhs - p;
        zz[k] = -lhs - p;
    }
    (
        ScalarField::from_raw(grid, rr, "rho_rho"),
        ScalarField::from_raw(grid, zz, "z_z"),
    )
}

fn exp_factor(grid: &MeridianGrid, psi: &[f64], gamma: &[f64]) -> Result<Vec<f64>, VerifyError> {
    (0..grid.len())
        .map(|k| {
            let e = (2.0 * gamma[k] - 2.0 * psi[k]).exp();
            if e.is_finite() {
                Ok(e)
            } else {
                let (rho, z) = grid.coords(k);
                Err(VerifyError::OverflowAtNode { node: k, rho, z })
            }
        })
        .collect()
}

/// `2Kε e^{2γ−2ψ} ρ ψ_z` at every node, with the discrete ψ_z.
pub fn integrability_defect(
    solution: &WeylSolution,
    params: &FluidParams,
) -> Result<ScalarField, VerifyError> {
    weighted_psi_z(
        solution,
        2.0 * params.coupling * params.epsilon,
        "integrability_defect",
    )
}

/// `c e^{2γ−2ψ} ρ ψ_z` at every node.
fn weighted_psi_z(solution: &WeylSolution, c: f64, name: &str) -> Result<ScalarField, VerifyError> {
    let grid = *solution.grid();
    let psi = solution.psi().values();
    let e = exp_factor(&grid, psi, solution.gamma().values())?;
    let pz = diff::d_z(&grid, psi);
    let out = (0..grid.len())
        .map(|k| {
            let (rho, _) = grid.coords(k);
            c * e[k] * rho * pz[k]
        })
        .collect();
    Ok(ScalarField::from_raw(grid, out, name))
}

/// Residuals of the five hydrostatic equations with `p = 0` substituted.
/// The tt row is divided through by `e^{4ψ−2γ}`.
pub fn fluid_residuals(
    solution: &WeylSolution,
    params: &FluidParams,
    tolerance: f64,
) -> Result<ResidualReport, VerifyError> {
    let grid = *solution.grid();
    require_resolution(&grid)?;
    let e = exp_factor(&grid, solution.psi().values(), solution.gamma().values())?;
    let ke = params.coupling * params.epsilon;
    let (mut tt, mut rr, mut zz, mut rz, mut pp) = (vec![], vec![], vec![], vec![], vec![]);
    for (i, j) in grid.interior_nodes() {
        let d = LocalDerivatives::at(solution, i, j);
        let k = grid.index(i, j);
        tt.push(d.tt() - ke * e[k]);
        rr.push(d.rho_rho());
        zz.push(-d.rho_rho());
        rz.push(d.rho_z());
        let g = solution.gamma().values()[k];
        pp.push(-(-2.0 * g).exp() * d.rho * d.rho * d.phi_phi());
    }
    let mut report = ResidualReport::new(tolerance);
    report.push(
        "tt",
        "psi_r^2 + psi_z^2 + gamma_rr + gamma_zz - 2(psi_rr + psi_r/rho + psi_zz) = K eps e^(2gamma-2psi)",
        tt,
    );
    report.push(
        "rho_rho",
        "psi_r^2 - psi_z^2 - gamma_r/rho = K p e^(2gamma-2psi)",
        rr,
    );
    report.push(
        "z_z",
        "gamma_r/rho - psi_r^2 + psi_z^2 = K p e^(2gamma-2psi)",
        zz,
    );
    report.push("rho_z", "2 psi_r psi_z - gamma_z/rho = 0", rz);
    report.push(
        "phi_phi",
        "-e^(-2gamma) rho^2 (psi_r^2 + psi_z^2 + gamma_rr + gamma_zz) = K p e^(-2psi) rho^2",
        pp,
    );
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointConfig {
    /// Stop once the sup-norm change of ψ between sweeps drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointStep {
    pub iteration: usize,
    pub psi_change: f64,
    pub solver_iterations: usize,
}

/// Pointwise ratio of two fields over the nodes where |ψ_z| is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSummary {
    pub nodes: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Nodes with the ratio in `[0.8, 1.2]`.
    pub within_band: usize,
}

impl RatioSummary {
    pub fn all_within_band(&self) -> bool {
        self.nodes > 0 && self.within_band == self.nodes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub epsilon: f64,
    pub coupling: f64,
    pub fixed_point_iterations: usize,
    pub history: Vec<FixedPointStep>,
    /// Nodes are compared only where `|ψ_z| > 10 h²`.
    pub psi_z_threshold: f64,
    /// `G_ρ − F_z` of the candidate's gradient fields, interior sup.
    pub measured_sup: f64,
    /// `2Kε e^{2γ−2ψ} ρ ψ_z`, interior sup.
    pub predicted_sup: f64,
    /// `−Kε e^{2γ−2ψ} ρ ψ_z`, the curl implied by the reduced equations.
    pub derived_sup: f64,
    pub ratio_to_predicted: RatioSummary,
    pub ratio_to_derived: RatioSummary,
    /// No node has a resolved ψ_z: the fields are z-independent and the
    /// obstruction is invisible. Not a counterexample.
    pub degenerate: bool,
    pub residuals: ResidualReport,
}

#[derive(Debug, Clone)]
pub struct NonexistenceCertificate {
    pub params: FluidParams,
    pub solution: WeylSolution,
    pub fields: GradientFields,
    pub measured: ScalarField,
    pub predicted: ScalarField,
    pub derived: ScalarField,
    /// The vacuum pipeline result when `ε = 0`.
    pub vacuum: Option<VacuumSolve>,
    pub report: CertificateReport,
}

fn ratio_summary(
    grid: &MeridianGrid,
    num: &ScalarField,
    den: &ScalarField,
    pz: &[f64],
    thr: f64,
) -> RatioSummary {
    let mut s = RatioSummary {
        nodes: 0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        mean: 0.0,
        within_band: 0,
    };
    for (i, j) in grid.interior_nodes() {
        if pz[grid.index(i, j)].abs() <= thr || den.at(i, j) == 0.0 {
            continue;
        }
        let r = num.at(i, j) / den.at(i, j);
        s.nodes += 1;
        s.min = s.min.min(r);
        s.max = s.max.max(r);
        s.mean += r;
        if (0.8..=1.2).contains(&r) {
            s.within_band += 1;
        }
    }
    if s.nodes == 0 {
        s.min = f64::NAN;
        s.max = f64::NAN;
        s.mean = f64::NAN;
    } else {
        s.mean /= s.nodes as f64;
    }
    s
}

/// Candidate (ψ, γ) for the hydrostatic problem and the curl of its gradient
/// fields. For `ε = 0` this is the vacuum pipeline unchanged.
pub fn nonexistence_certificate(
    grid: &MeridianGrid,
    boundary: &BoundaryData,
    params: &FluidParams,
    solver: &SolverConfig,
    fixed_point: &FixedPointConfig,
) -> Result<NonexistenceCertificate, FluidError> {
    params.validate()?;
    require_resolution(grid)?;
    let mut history = Vec::new();
    let (solution, fields, vacuum) = if params.epsilon == 0.0 {
        let v = solve_vacuum(grid, boundary, &SourcePair::Zero, solver, None)?;
        (v.solution.clone(), v.fields.clone(), Some(v))
    } else {
        let half = -0.5 * params.coupling * params.epsilon;
        let mut psi = solve_psi(grid, boundary, solver)?.psi;
        let mut settled = false;
        for iteration in 1..=fixed_point.max_iterations {
            let fields = build_gradient_fields(&psi, &SourcePair::Zero, grid)?;
            let gamma = integrate_gamma(&fields, boundary.anchor());
            let e = exp_factor(grid, psi.values(), gamma.values())?;
            let source =
                ScalarField::from_raw(*grid, e.iter().map(|e| half * e).collect(), "source");
            let outcome = solve_poisson_from(grid, boundary, Some(&source), solver, &psi)?;
            let change = psi.sup_diff(&outcome.psi);
            history.push(FixedPointStep {
                iteration,
                psi_change: change,
                solver_iterations: outcome.iterations,
            });
            if !change.is_finite() {
                break;
            }
            psi = outcome.psi;
            if change < fixed_point.tolerance {
                settled = true;
                break;
            }
        }
        if !settled {
            let last = history.last().map_or(f64::NAN, |s| s.psi_change);
            return Err(FluidError::FixedPointDiverged { history, last });
        }
        let fields = build_gradient_fields(&psi, &SourcePair::Zero, grid)?;
        let gamma = integrate_gamma(&fields, boundary.anchor());
        (WeylSolution::new(psi, gamma)?, fields, None)
    };

    let measured = match &vacuum {
        Some(v) => v.exactness.defect.clone(),
        None => curl_defect(&fields),
    };
    let predicted = integrability_defect(&solution, params)?;
    let derived = weighted_psi_z(
        &solution,
        -params.coupling * params.epsilon,
        "derived_defect",
    )?;
    let pz = diff::d_z(grid, solution.psi().values());
    let thr = 10.0 * grid.h_max().powi(2);
    let ratio_to_predicted = ratio_summary(grid, &measured, &predicted, &pz, thr);
    let ratio_to_derived = ratio_summary(grid, &measured, &derived, &pz, thr);
    let degenerate = grid
        .interior_nodes()
        .all(|(i, j)| pz[grid.index(i, j)].abs() <= thr);
    let residuals = fluid_residuals(&solution, params, default_residual_tolerance(&solution))?;
    let report = CertificateReport {
        epsilon: params.epsilon,
        coupling: params.coupling,
        fixed_point_iterations: history.len(),
        history,
        psi_z_threshold: thr,
        measured_sup: measured.interior_sup(),
        predicted_sup: predicted.interior_sup(),
        derived_sup: derived.interior_sup(),
        ratio_to_predicted,
        ratio_to_derived,
        degenerate,
        residuals,
    };
    Ok(NonexistenceCertificate {
        params: *params,
        solution,
        fields,
        measured,
        predicted,
        derived,
        vacuum,
        report,
    })
}
