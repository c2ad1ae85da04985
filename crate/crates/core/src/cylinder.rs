//! Steady flow outside a cylinder moving along its axis, with ψ and γ
//! depending on ρ only.
//!
//! The viscous equation forces `v ≡ v_R`, the T₁₂ equation then forces
//! `γ = ψ + C` (only when `v_R ≠ 0`), the pressure and energy density vanish,
//! and `ψ = k₁ log ρ + k₂` with `k₁² = k₁`. Residuals are evaluated with the
//! exact derivatives of these profiles.

use crate::verify::{weyl_metric, MetricComponents, ResidualReport};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CylinderError {
    #[error("invalid boundary data: {0}")]
    InvalidBoundary(String),
    #[error(
        "boundary velocity is zero: the T12 equation no longer forces gamma' = psi', \
         so gamma = psi + C is not determined and no solution is returned"
    )]
    ZeroBoundaryVelocity,
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("metric overflows at rho = {0}")]
    Overflow(f64),
}

fn finite(name: &str, v: f64) -> Result<(), CylinderError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CylinderError::InvalidBoundary(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderBC {
    pub radius: f64,
    pub v_r: f64,
    pub psi_r: f64,
    pub gamma_r: f64,
}

impl CylinderBC {
    pub fn new(radius: f64, v_r: f64, psi_r: f64, gamma_r: f64) -> Result<Self, CylinderError> {
        let bc = Self {
            radius,
            v_r,
            psi_r,
            gamma_r,
        };
        bc.validate()?;
        Ok(bc)
    }

    pub fn validate(&self) -> Result<(), CylinderError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(CylinderError::InvalidBoundary(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        finite("v_R", self.v_r)?;
        finite("psi_R", self.psi_r)?;
        finite("gamma_R", self.gamma_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    K1Zero,
    K1One,
}

impl Branch {
    pub fn k1(self) -> f64 {
        match self {
            Branch::K1Zero => 0.0,
            Branch::K1One => 1.0,
        }
    }
}

/// `ψ = k₁ log ρ + k₂`, `γ = ψ + C`, `v ≡ v_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylindricalSolution {
    pub branch: Branch,
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
    pub v_r: f64,
    pub pressure: f64,
    pub epsilon: f64,
}

impl CylindricalSolution {
    /// The profile of the given branch through the boundary values.
    pub fn on_branch(bc: &CylinderBC, branch: Branch) -> Self {
        let k1 = branch.k1();
        Self {
            branch,
            k1,
            k2: bc.psi_r - k1 * bc.radius.ln(),
            c: bc.gamma_r - bc.psi_r,
            v_r: bc.v_r,
            pressure: 0.0,
            epsilon: 0.0,
        }
    }

    pub fn psi(&self, rho: f64) -> f64 {
        self.k1 * rho.ln() + self.k2
    }

    pub fn gamma(&self, rho: f64) -> f64 {
        self.psi(rho) + self.c
    }

    pub fn v(&self, _rho: f64) -> f64 {
        self.v_r
    }
}

/// The solution with `k₁ = 1`: `ψ = log ρ − log R + ψ_R`,
/// `γ = log ρ − log R + γ_R`.
pub fn solve_cylinder(bc: &CylinderBC) -> Result<CylindricalSolution, CylinderError> {
    bc.validate()?;
    if bc.v_r == 0.0 {
        return Err(CylinderError::ZeroBoundaryVelocity);
    }
    Ok(CylindricalSolution::on_branch(bc, Branch::K1One))
}

/// A trial state `ψ = k₁ log ρ + k₂`, `γ = ψ + C`, `v ≡ v` with given pressure
/// and energy density, and the coefficients `K` and `cη`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
    pub v: f64,
    pub pressure: f64,
    pub epsilon: f64,
    pub coupling: f64,
    pub c_eta: f64,
}

impl Trial {
    pub fn from_solution(s: &CylindricalSolution) -> Self {
        Self {
            k1: s.k1,
            k2: s.k2,
            c: s.c,
            v: s.v_r,
            pressure: s.pressure,
            epsilon: s.epsilon,
            coupling: 1.0,
            c_eta: 1.0,
        }
    }

    /// Trial through the boundary values with an arbitrary `k₁`, `p = ε = 0`.
    pub fn with_k1(k1: f64, bc: &CylinderBC) -> Self {
        Self {
            k1,
            k2: bc.psi_r - k1 * bc.radius.ln(),
            c: bc.gamma_r - bc.psi_r,
            v: bc.v_r,
            pressure: 0.0,
            epsilon: 0.0,
            coupling: 1.0,
            c_eta: 1.0,
        }
    }

    /// The seven non-trivial equations as `lhs − rhs`, in the order
    /// tt, T₁₂, T₁₃, ρρ, T₂₃, zz, φφ.
    pub fn residuals(&self, rho: f64) -> [f64; 7] {
        let psi = self.k1 * rho.ln() + self.k2;
        let gamma = psi + self.c;
        let dpsi = self.k1 / rho;
        let ddpsi = -self.k1 / (rho * rho);
        let (dgamma, ddgamma) = (dpsi, ddpsi);
        let (v, dv) = (self.v, 0.0);
        let (p, eps, k) = (self.pressure, self.epsilon, self.coupling);
        let e2 = (2.0 * gamma - 2.0 * psi).exp();
        let e3 = (2.0 * gamma - 3.0 * psi).exp();
        [
            (2.0 * psi - 2.0 * gamma).exp() * (dpsi * dpsi + ddgamma - 2.0 * (ddpsi + dpsi / rho))
                - eps * k,
            self.c_eta * v * v * e3 * (dgamma - dpsi),
            (eps + p) * e2 * v,
            dpsi * dpsi - dgamma / rho - k * p * e2,
            self.c_eta * dv * e3,
            -dpsi * dpsi + dgamma / rho
                - k * (p * e2 + (eps + p) * (4.0 * gamma - 6.0 * psi).exp() * v * v),
            dpsi * dpsi + ddgamma + k * p * e2,
        ]
    }

    /// Sum of the ρρ and zz residuals once `ε = −p` has removed the velocity
    /// term: `−2Kp e^{2γ−2ψ}` for every `p`.
    pub fn pressure_annihilation(&self, rho: f64) -> f64 {
        let t = Self {
            epsilon: -self.pressure,
            ..*self
        };
        let r = t.residuals(rho);
        r[3] + r[5]
    }
}

pub const CYLINDER_EQUATIONS: [(&str, &str); 7] = [
    (
        "tt",
        "e^(2psi-2gamma)[psi'^2 + gamma'' - 2(psi'' + psi'/rho)] = eps K",
    ),
    ("t12", "c eta v^2 e^(2gamma-3psi)(gamma' - psi') = 0"),
    ("t13", "(eps + p) e^(2gamma-2psi) v = 0"),
    ("rho_rho", "psi'^2 - gamma'/rho = K p e^(2gamma-2psi)"),
    ("t23", "c eta v' e^(2gamma-3psi) = 0"),
    (
        "z_z",
        "-psi'^2 + gamma'/rho = K[p e^(2gamma-2psi) + (eps + p) e^(4gamma-6psi) v^2]",
    ),
    ("phi_phi", "psi'^2 + gamma'' = -K p e^(2gamma-2psi)"),
];

/// Residuals of the seven equations for the trial with the given `k₁`
/// through the boundary values, at every sample radius.
pub fn branch_residuals(
    k1: f64,
    bc: &CylinderBC,
    radii: &[f64],
    tolerance: f64,
) -> Result<ResidualReport, CylinderError> {
    trial_residuals(&Trial::with_k1(k1, bc), radii, tolerance)
}

pub fn trial_residuals(
    trial: &Trial,
    radii: &[f64],
    tolerance: f64,
) -> Result<ResidualReport, CylinderError> {
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(CylinderError::InvalidRadius(r));
    }
    let rows: Vec<[f64; 7]> = radii.iter().map(|&r| trial.residuals(r)).collect();
    let mut report = ResidualReport::new(tolerance);
    for (e, (label, equation)) in CYLINDER_EQUATIONS.iter().enumerate() {
        report.push(label, equation, rows.iter().map(|row| row[e]));
    }
    Ok(report)
}

/// Max over the radii of `|ψ'² + γ''|` for the trial `k₁`, which is
/// `|k₁² − k₁| / ρ²`.
pub fn dichotomy_residual(k1: f64, radii: &[f64]) -> f64 {
    radii
        .iter()
        .map(|&r| {
            let d = k1 / r;
            (d * d - k1 / (r * r)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn assemble_cylindrical_metric(
    solution: &CylindricalSolution,
    rho: f64,
) -> Result<MetricComponents, CylinderError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(CylinderError::InvalidRadius(rho));
    }
    weyl_metric(solution.psi(rho), solution.gamma(rho), rho).ok_or(CylinderError::Overflow(rho))
}

/// Non-vanishing covariant stress components of the viscous fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StressComponents {
    pub t11: f64,
    pub t12: f64,
    pub t13: f64,
    pub t22: f64,
    pub t23: f64,
    pub t33: f64,
    pub t44: f64,
}

impl StressComponents {
    pub fn max_abs(&self) -> f64 {
        [
            self.t11, self.t12, self.t13, self.t22, self.t23, self.t33, self.t44,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn stress_components(trial: &Trial, rho: f64) -> StressComponents {
    let psi = trial.k1 * rho.ln() + trial.k2;
    let gamma = psi + trial.c;
    let dpsi = trial.k1 / rho;
    let dgamma = dpsi;
    let (p, eps, v) = (trial.pressure, trial.epsilon, trial.v);
    let e2 = (2.0 * gamma - 2.0 * psi).exp();
    let e3 = (2.0 * gamma - 3.0 * psi).exp();
    StressComponents {
        t11: eps * (2.0 * psi).exp(),
        t12: trial.c_eta * v * v * e3 * (dgamma - dpsi),
        t13: -(eps + p) * v * e2,
        t22: p * e2,
        t23: 0.0,
        t33: p * e2 + (eps + p) * (4.0 * gamma - 6.0 * psi).exp() * v * v,
        t44: p * rho * (-2.0 * psi).exp(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub rho: f64,
    pub psi: f64,
    pub gamma: f64,
    pub v: f64,
    pub g_tt: f64,
    pub g_rr: f64,
    pub g_zz: f64,
    pub g_pp: f64,
}

pub fn radial_profile(
    solution: &CylindricalSolution,
    radii: &[f64],
) -> Result<Vec<RadialSample>, CylinderError> {
    radii
        .iter()
        .map(|&rho| {
            let m = assemble_cylindrical_metric(solution, rho)?;
            Ok(RadialSample {
                rho,
                psi: solution.psi(rho),
                gamma: solution.gamma(rho),
                v: solution.v(rho),
                g_tt: m.g_tt,
                g_rr: m.g_rr,
                g_zz: m.g_zz,
                g_pp: m.g_pp,
            })
        })
        .collect()
}

/// `n` radii evenly spaced on `[a, b]`, both ends included.
pub fn sample_radii(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    b
                } else {
                    a + (b - a) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouetteBC {
    pub r1: f64,
    pub r2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl CouetteBC {
    pub fn new(r1: f64, r2: f64, v1: f64, v2: f64) -> Result<Self, CylinderError> {
        let bc = Self { r1, r2, v1, v2 };
        bc.validate()?;
        Ok(bc)
    }

    pub fn validate(&self) -> Result<(), CylinderError> {
        if !(self.r1 > 0.0 && self.r2 > self.r1 && self.r2.is_finite()) {
            return Err(CylinderError::InvalidBoundary(format!(
                "need 0 < R1 < R2, got R1 = {}, R2 = {}",
                self.r1, self.r2
            )));
        }
        finite("v1", self.v1)?;
        finite("v2", self.v2)
    }
}

/// Newtonian flow between two coaxial cylinders, the solution of
/// `v'' + v'/ρ = 0` with `v(R₁) = v₁`, `v(R₂) = v₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouetteProfile {
    bc: CouetteBC,
    log_span: f64,
}

impl CouetteProfile {
    pub fn bc(&self) -> &CouetteBC {
        &self.bc
    }

    /// `v₁ + (v₂ − v₁) log(ρ/R₁) / log(R₂/R₁)`, returning the wall values
    /// exactly at the walls.
    pub fn v(&self, rho: f64) -> f64 {
        let bc = &self.bc;
        if rho == bc.r1 {
            bc.v1
        } else if rho == bc.r2 {
            bc.v2
        } else {
            bc.v1 + (bc.v2 - bc.v1) * (rho / bc.r1).ln() / self.log_span
        }
    }

    pub fn dv(&self, rho: f64) -> f64 {
        (self.bc.v2 - self.bc.v1) / (rho * self.log_span)
    }
}

pub fn couette_newtonian(bc: &CouetteBC) -> Result<CouetteProfile, CylinderError> {
    bc.validate()?;
    Ok(CouetteProfile {
        bc: *bc,
        log_span: (bc.r2 / bc.r1).ln(),
    })
}

/// The profile with `log(ρ/R₁)` in the denominator as well: it is `v₂`
/// away from the inner wall and `0/0` on it.
pub fn couette_literal(bc: &CouetteBC, rho: f64) -> f64 {
    let l = (rho / bc.r1).ln();
    (bc.v2 - bc.v1) / l * l + bc.v1
}
