use std::path::PathBuf;
use thiserror::Error;
use weyl_core::cylinder::CylinderError;
use weyl_core::elliptic::SolveError;
use weyl_core::fluid::FluidError;
use weyl_core::grid::GridError;
use weyl_core::pipeline::PipelineError;
use weyl_core::quadrature::QuadratureError;
use weyl_core::verify::VerifyError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESIDUAL: i32 = 3;
pub const EXIT_ZERO_VELOCITY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{message}\n{trace}")]
    FixedPointDiverged { message: String, trace: String },
    #[error("{0}")]
    ZeroBoundaryVelocity(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Io { .. }
            | CliError::Csv { .. }
            | CliError::GridMismatch(_) => EXIT_CONFIG,
            CliError::NotConverged(_) | CliError::FixedPointDiverged { .. } => EXIT_NOT_CONVERGED,
            CliError::ZeroBoundaryVelocity(_) => EXIT_ZERO_VELOCITY,
            CliError::Numerical(_) => EXIT_RESIDUAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<QuadratureError> for CliError {
    fn from(e: QuadratureError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::OverflowAtNode { .. } => CliError::Numerical(e.to_string()),
            VerifyError::GridMismatch => CliError::GridMismatch(e.to_string()),
            VerifyError::Sources(q) => q.into(),
            VerifyError::TooFewNodes { .. } => CliError::Config(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Solve(e) => e.into(),
            PipelineError::Quadrature(e) => e.into(),
            PipelineError::Verify(e) => e.into(),
        }
    }
}

impl From<FluidError> for CliError {
    fn from(e: FluidError) -> Self {
        match e {
            FluidError::FixedPointDiverged { ref history, .. } => {
                let trace = history
                    .iter()
                    .map(|s| {
                        format!(
                            "  sweep {:>4}: |dpsi| = {:.6e} ({} solver iterations)",
                            s.iteration, s.psi_change, s.solver_iterations
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n");
                CliError::FixedPointDiverged {
                    message: e.to_string(),
                    trace,
                }
            }
            FluidError::InvalidParams(m) => CliError::Config(m),
            FluidError::Solve(e) => e.into(),
            FluidError::Quadrature(e) => e.into(),
            FluidError::Verify(e) => e.into(),
            FluidError::Pipeline(e) => e.into(),
        }
    }
}

impl From<CylinderError> for CliError {
    fn from(e: CylinderError) -> Self {
        match e {
            CylinderError::ZeroBoundaryVelocity => CliError::ZeroBoundaryVelocity(e.to_string()),
            CylinderError::Overflow(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
