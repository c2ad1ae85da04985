//! The constructive solve: ψ from the Dirichlet problem, (F, G) from ψ and the
//! sources, γ by quadrature from the anchor, then residuals of the full system.

use crate::elliptic::{solve_psi, SolveError, SolveOutcome, SolverConfig};
use crate::grid::{BoundaryData, MeridianGrid};
use crate::quadrature::{
    build_gradient_fields, check_analyticity, check_exactness, integrate_gamma, AnalyticityReport,
    ExactnessReport, GradientFields, QuadratureError, SourcePair,
};
use crate::verify::{
    default_residual_tolerance, generalized_residuals, VacuumResiduals, VerifyError, WeylSolution,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone)]
pub struct VacuumSolve {
    pub outcome: SolveOutcome,
    pub fields: GradientFields,
    pub exactness: ExactnessReport,
    pub analyticity: AnalyticityReport,
    pub solution: WeylSolution,
    pub residuals: VacuumResiduals,
}

impl VacuumSolve {
    /// Residuals, exactness and analyticity all within their thresholds.
    pub fn all_pass(&self) -> bool {
        self.residuals.report.all_pass && self.exactness.integrable && self.analyticity.certified
    }
}

/// Runs the whole pipeline. `residual_tolerance` defaults to
/// `10 h² (1 + max |field|)`.
pub fn solve_vacuum(
    grid: &MeridianGrid,
    boundary: &BoundaryData,
    sources: &SourcePair,
    config: &SolverConfig,
    residual_tolerance: Option<f64>,
) -> Result<VacuumSolve, PipelineError> {
    let analyticity = check_analyticity(sources, grid, None)?;
    let outcome = solve_psi(grid, boundary, config)?;
    let fields = build_gradient_fields(&outcome.psi, sources, grid)?;
    let exactness = check_exactness(&fields, None);
    let gamma = integrate_gamma(&fields, boundary.anchor());
    let solution = WeylSolution::new(outcome.psi.clone(), gamma)?;
    let tolerance = residual_tolerance.unwrap_or_else(|| default_residual_tolerance(&solution));
    let residuals = generalized_residuals(&solution, sources, tolerance)?;
    Ok(VacuumSolve {
        outcome,
        fields,
        exactness,
        analyticity,
        solution,
        residuals,
    })
}
