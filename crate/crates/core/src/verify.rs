//! Metric assembly, Einstein tensor components and residuals of the vacuum
//! system for a candidate pair (ψ, γ).
//!
//! All derivatives are centred and evaluated on interior nodes only. The
//! four equations of the (generalized) vacuum system are
//!
//! ```text
//! tt        −2(ψ_ρρ + ψ_ρ/ρ + ψ_zz) + ψ_ρ² + ψ_z² + γ_ρρ + γ_zz = 0
//! rho_rho   ψ_ρ² − γ_ρ/ρ − ψ_z² = g
//! rho_z     2ψ_ρψ_z − γ_z/ρ = h
//! phi_phi   ψ_ρ² + ψ_z² + γ_ρρ + γ_zz = 0
//! ```
//!
//! The tt component of the Einstein tensor is the tt bracket times an
//! exponential prefactor. Two different prefactors, `e^{4ψ+2γ}` and
//! `e^{4ψ−2γ}`, appear in the literature for the same bracket; both are
//! reported and no choice is made here. Only the bracket enters residuals.

use crate::diff;
use crate::grid::{MeridianGrid, ScalarField};
use crate::quadrature::{QuadratureError, SourcePair};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("exponential overflow at node {node} (rho = {rho}, z = {z})")]
    OverflowAtNode { node: usize, rho: f64, z: f64 },
    #[error("need at least 5 nodes per direction for second derivatives, got {n_rho}x{n_z}")]
    TooFewNodes { n_rho: usize, n_z: usize },
    #[error("psi and gamma live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Sources(#[from] QuadratureError),
}

/// The two Weyl potentials on a shared grid.
#[derive(Debug, Clone)]
pub struct WeylSolution {
    psi: ScalarField,
    gamma: ScalarField,
}

impl WeylSolution {
    pub fn new(psi: ScalarField, gamma: ScalarField) -> Result<Self, VerifyError> {
        if psi.grid() != gamma.grid() {
            return Err(VerifyError::GridMismatch);
        }
        Ok(Self { psi, gamma })
    }
    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }
    pub fn gamma(&self) -> &ScalarField {
        &self.gamma
    }
    pub fn grid(&self) -> &MeridianGrid {
        self.psi.grid()
    }
    pub fn max_magnitude(&self) -> f64 {
        self.psi.max_abs().max(self.gamma.max_abs())
    }
}

/// Covariant metric components at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricComponents {
    pub g_tt: f64,
    pub g_rr: f64,
    pub g_zz: f64,
    pub g_pp: f64,
}

/// `e^{2ψ} dt² − e^{2γ−2ψ}(dρ² + dz²) − e^{−2ψ} ρ² dφ²`. Returns `None` when
/// an exponential is not representable.
pub fn weyl_metric(psi: f64, gamma: f64, rho: f64) -> Option<MetricComponents> {
    let g_tt = (2.0 * psi).exp();
    let spatial = (2.0 * gamma - 2.0 * psi).exp();
    let angular = (-2.0 * psi).exp();
    let ok = [g_tt, spatial, angular]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
    ok.then(|| MetricComponents {
        g_tt,
        g_rr: -spatial,
        g_zz: -spatial,
        g_pp: -angular * rho * rho,
    })
}

#[derive(Debug, Clone)]
pub struct MetricSample {
    pub grid: MeridianGrid,
    pub nodes: Vec<MetricComponents>,
}

pub fn assemble_metric(solution: &WeylSolution) -> Result<MetricSample, VerifyError> {
    let grid = *solution.grid();
    let nodes = (0..grid.len())
        .map(|k| {
            let (rho, z) = grid.coords(k);
            weyl_metric(solution.psi.values()[k], solution.gamma.values()[k], rho)
                .ok_or(VerifyError::OverflowAtNode { node: k, rho, z })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MetricSample { grid, nodes })
}

/// Centred derivatives of ψ and γ at one interior node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalDerivatives {
    pub rho: f64,
    pub psi_r: f64,
    pub psi_z: f64,
    pub psi_lap: f64,
    pub gamma_r: f64,
    pub gamma_z: f64,
    pub gamma_rr: f64,
    pub gamma_zz: f64,
}

impl LocalDerivatives {
    pub(crate) fn at(solution: &WeylSolution, i: usize, j: usize) -> Self {
        let grid = solution.grid();
        let (p, g) = (solution.psi.values(), solution.gamma.values());
        Self {
            rho: grid.rho(i),
            psi_r: diff::central_rho(grid, p, i, j),
            psi_z: diff::central_z(grid, p, i, j),
            psi_lap: diff::axisymmetric_laplacian(grid, p, i, j),
            gamma_r: diff::central_rho(grid, g, i, j),
            gamma_z: diff::central_z(grid, g, i, j),
            gamma_rr: diff::central_rho_rho(grid, g, i, j),
            gamma_zz: diff::central_z_z(grid, g, i, j),
        }
    }

    /// `ψ_ρ² + ψ_z² + γ_ρρ + γ_zz`
    pub(crate) fn phi_phi(&self) -> f64 {
        self.psi_r * self.psi_r + self.psi_z * self.psi_z + self.gamma_rr + self.gamma_zz
    }

    /// `−2 Δψ + ψ_ρ² + ψ_z² + γ_ρρ + γ_zz`
    pub(crate) fn tt(&self) -> f64 {
        -2.0 * self.psi_lap + self.phi_phi()
    }

    /// `ψ_ρ² − γ_ρ/ρ − ψ_z²`
    pub(crate) fn rho_rho(&self) -> f64 {
        self.psi_r * self.psi_r - self.gamma_r / self.rho - self.psi_z * self.psi_z
    }

    /// `2ψ_ρψ_z − γ_z/ρ`
    pub(crate) fn rho_z(&self) -> f64 {
        2.0 * self.psi_r * self.psi_z - self.gamma_z / self.rho
    }
}

pub(crate) fn require_resolution(grid: &MeridianGrid) -> Result<(), VerifyError> {
    if grid.n_rho() < 5 || grid.n_z() < 5 {
        return Err(VerifyError::TooFewNodes {
            n_rho: grid.n_rho(),
            n_z: grid.n_z(),
        });
    }
    Ok(())
}

/// Non-vanishing Einstein tensor components, interior nodes only.
#[derive(Debug, Clone)]
pub struct EinsteinComponents {
    /// The bracket of the tt component; vanishes for vacuum solutions.
    pub g11_bracket: ScalarField,
    /// `e^{4ψ+2γ}`
    pub g11_prefactor_plus: ScalarField,
    /// `e^{4ψ−2γ}`
    pub g11_prefactor_minus: ScalarField,
    pub g22: ScalarField,
    pub g23: ScalarField,
    pub g33: ScalarField,
    pub g44: ScalarField,
}

impl EinsteinComponents {
    /// tt component with the `e^{4ψ+2γ}` prefactor.
    pub fn g11_plus(&self) -> ScalarField {
        product(&self.g11_prefactor_plus, &self.g11_bracket, "g11_plus")
    }
    /// tt component with the `e^{4ψ−2γ}` prefactor.
    pub fn g11_minus(&self) -> ScalarField {
        product(&self.g11_prefactor_minus, &self.g11_bracket, "g11_minus")
    }
}

fn product(a: &ScalarField, b: &ScalarField, name: &str) -> ScalarField {
    let v = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x * y)
        .collect();
    ScalarField::from_raw(*a.grid(), v, name)
}

pub fn einstein_components(solution: &WeylSolution) -> Result<EinsteinComponents, VerifyError> {
    let grid = *solution.grid();
    require_resolution(&grid)?;
    let n = grid.len();
    let (mut br, mut pp, mut pm) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut g22, mut g23, mut g33, mut g44) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, j) in grid.interior_nodes() {
        let k = grid.index(i, j);
        let d = LocalDerivatives::at(solution, i, j);
        let (psi, gamma) = (solution.psi.values()[k], solution.gamma.values()[k]);
        let plus = (4.0 * psi + 2.0 * gamma).exp();
        let minus = (4.0 * psi - 2.0 * gamma).exp();
        let decay = (-2.0 * gamma).exp();
        if !(plus.is_finite() && minus.is_finite() && decay.is_finite()) {
            let (rho, z) = grid.coords(k);
            return Err(VerifyError::OverflowAtNode { node: k, rho, z });
        }
        br[k] = d.tt();
        pp[k] = plus;
        pm[k] = minus;
        g22[k] = d.rho_rho();
        g23[k] = d.rho_z();
        g33[k] = -g22[k];
        g44[k] = -decay * d.rho * d.rho * d.phi_phi();
    }
    let f = |v, name| ScalarField::from_raw(grid, v, name);
    Ok(EinsteinComponents {
        g11_bracket: f(br, "g11_bracket"),
        g11_prefactor_plus: f(pp, "g11_prefactor_plus"),
        g11_prefactor_minus: f(pm, "g11_prefactor_minus"),
        g22: f(g22, "g22"),
        g23: f(g23, "g23"),
        g33: f(g33, "g33"),
        g44: f(g44, "g44"),
    })
}

/// Norms of one residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationResidual {
    pub label: String,
    pub equation: String,
    pub sup: f64,
    pub rms: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub tolerance: f64,
    pub equations: Vec<EquationResidual>,
    pub all_pass: bool,
}

impl ResidualReport {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            equations: Vec::new(),
            all_pass: true,
        }
    }

    /// Adds an equation from its sampled residual values.
    pub fn push(&mut self, label: &str, equation: &str, values: impl IntoIterator<Item = f64>) {
        let (mut sup, mut sq, mut n) = (0.0f64, 0.0, 0usize);
        for v in values {
            // NaN must not pass.
            sup = if v.is_nan() {
                f64::NAN
            } else {
                sup.max(v.abs())
            };
            sq += v * v;
            n += 1;
        }
        let rms = if n == 0 { 0.0 } else { (sq / n as f64).sqrt() };
        let pass = sup <= self.tolerance;
        self.all_pass &= pass;
        self.equations.push(EquationResidual {
            label: label.to_string(),
            equation: equation.to_string(),
            sup,
            rms,
            pass,
        });
    }

    pub fn get(&self, label: &str) -> Option<&EquationResidual> {
        self.equations.iter().find(|e| e.label == label)
    }
}

/// Residual fields (interior nodes; zero elsewhere) with their report.
#[derive(Debug, Clone)]
pub struct VacuumResiduals {
    pub tt: ScalarField,
    pub rho_rho: ScalarField,
    pub rho_z: ScalarField,
    pub phi_phi: ScalarField,
    pub report: ResidualReport,
}

/// `10 h² (1 + max(|ψ|, |γ|))`.
pub fn default_residual_tolerance(solution: &WeylSolution) -> f64 {
    10.0 * solution.grid().h_max().powi(2) * (1.0 + solution.max_magnitude())
}

pub const TT_LABEL: &str = "tt";
pub const RHO_RHO_LABEL: &str = "rho_rho";
pub const RHO_Z_LABEL: &str = "rho_z";
pub const PHI_PHI_LABEL: &str = "phi_phi";
pub const IDENTITY_LABEL: &str = "reconstructed_identity";

pub fn vacuum_residuals(
    solution: &WeylSolution,
    tolerance: f64,
) -> Result<VacuumResiduals, VerifyError> {
    generalized_residuals(solution, &SourcePair::Zero, tolerance)
}

/// Residuals of the system with right-hand sides (g, h) in the ρρ and ρz
/// equations.
pub fn generalized_residuals(
    solution: &WeylSolution,
    sources: &SourcePair,
    tolerance: f64,
) -> Result<VacuumResiduals, VerifyError> {
    let grid = *solution.grid();
    require_resolution(&grid)?;
    let (g_src, h_src) = sources.sample(&grid)?;
    let n = grid.len();
    let (mut tt, mut rr, mut rz, mut pp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, j) in grid.interior_nodes() {
        let k = grid.index(i, j);
        let d = LocalDerivatives::at(solution, i, j);
        tt[k] = d.tt();
        rr[k] = d.rho_rho() - g_src[k];
        rz[k] = d.rho_z() - h_src[k];
        pp[k] = d.phi_phi();
    }
    let f = |v, name| ScalarField::from_raw(grid, v, name);
    let (tt, rho_rho, rho_z, phi_phi) = (
        f(tt, TT_LABEL),
        f(rr, RHO_RHO_LABEL),
        f(rz, RHO_Z_LABEL),
        f(pp, PHI_PHI_LABEL),
    );
    let interior = |s: &ScalarField| {
        grid.interior_nodes()
            .map(|(i, j)| s.at(i, j))
            .collect::<Vec<_>>()
    };
    let mut report = ResidualReport::new(tolerance);
    report.push(
        TT_LABEL,
        "-2(psi_rr + psi_r/rho + psi_zz) + psi_r^2 + psi_z^2 + gamma_rr + gamma_zz = 0",
        interior(&tt),
    );
    report.push(
        RHO_RHO_LABEL,
        "psi_r^2 - gamma_r/rho - psi_z^2 = g",
        interior(&rho_rho),
    );
    report.push(
        RHO_Z_LABEL,
        "2 psi_r psi_z - gamma_z/rho = h",
        interior(&rho_z),
    );
    report.push(
        PHI_PHI_LABEL,
        "psi_r^2 + psi_z^2 + gamma_rr + gamma_zz = 0",
        interior(&phi_phi),
    );
    report.push(
        IDENTITY_LABEL,
        "psi_r^2 + psi_z^2 + gamma_rr + gamma_zz = 0 for the reconstructed pair",
        interior(&phi_phi),
    );
    Ok(VacuumResiduals {
        tt,
        rho_rho,
        rho_z,
        phi_phi,
        report,
    })
}
