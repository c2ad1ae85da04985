//! TOML run configuration.
//!
//! ```toml
//! [domain]
//! rho_min = 1.0
//! rho_max = 2.0
//! z_min = 0.5
//! z_max = 1.5
//! n_rho = 65
//! n_z = 65
//!
//! [boundary]
//! kind = "curzon"      # constant, linear_z, curzon, dipole, log_radial, table
//! mass = 1.0
//!
//! [anchor]             # optional; defaults to (rho_min, z_min) with gamma = 0
//! rho = 2.0
//! z = 1.5
//! gamma = -0.0703125
//!
//! [solver]             # optional
//! tolerance = 1e-10
//! method = "sor"       # or "conjugate_gradient"
//!
//! [sources]            # optional; kind = zero, polynomial or affine
//! kind = "zero"
//!
//! [fluid]              # optional; used by fluid-check
//! epsilon = 1.0
//! coupling = 1.0
//! ```

use crate::error::CliError;
use serde::Deserialize;
use std::path::Path;
use weyl_core::elliptic::{SolverConfig, SolverMethod};
use weyl_core::fluid::{FixedPointConfig, FluidParams};
use weyl_core::grid::{Anchor, BoundaryData, BoundaryTrace, EdgeTable, MeridianGrid};
use weyl_core::quadrature::SourcePair;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub boundary: BoundaryConfig,
    pub anchor: Option<AnchorConfig>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sources: SourcesConfig,
    #[serde(default)]
    pub fluid: FluidSection,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub n_rho: usize,
    pub n_z: usize,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    Constant {
        value: f64,
    },
    LinearZ {
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    Curzon {
        #[serde(default = "one")]
        mass: f64,
    },
    Dipole {
        #[serde(default = "one")]
        moment: f64,
    },
    LogRadial {
        k1: f64,
        k2: f64,
    },
    /// Piecewise-linear edges given as `[coordinate, value]` pairs: ρ along
    /// bottom and top, z along left and right.
    Table {
        bottom: Vec<[f64; 2]>,
        right: Vec<[f64; 2]>,
        top: Vec<[f64; 2]>,
        left: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    pub rho: f64,
    pub z: f64,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub method: Option<SolverMethod>,
    pub omega: Option<f64>,
    /// Pass threshold for the equation residuals; defaults to
    /// `10 h² (1 + max(|ψ|, |γ|))`.
    pub residual_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourcesConfig {
    #[default]
    Zero,
    /// `ρh + iρg = Σ c_k w^k` with `c_k = [re, im]`.
    Polynomial { coefficients: Vec<[f64; 2]> },
    /// `[c0, c_rho, c_z]` for each of g and h.
    Affine { g: [f64; 3], h: [f64; 3] },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidSection {
    pub epsilon: f64,
    pub coupling: f64,
    pub viscosity: f64,
    pub fixed_point_tolerance: f64,
    pub fixed_point_max_iterations: usize,
}

impl Default for FluidSection {
    fn default() -> Self {
        let p = FluidParams::default();
        let f = FixedPointConfig::default();
        Self {
            epsilon: p.epsilon,
            coupling: p.coupling,
            viscosity: p.viscosity,
            fixed_point_tolerance: f.tolerance,
            fixed_point_max_iterations: f.max_iterations,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub n_rho: Option<usize>,
    pub n_z: Option<usize>,
    pub tolerance: Option<f64>,
    pub residual_tolerance: Option<f64>,
    pub epsilon: Option<f64>,
    pub coupling: Option<f64>,
}

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: MeridianGrid,
    pub boundary: BoundaryData,
    pub sources: SourcePair,
    pub solver: SolverConfig,
    pub residual_tolerance: Option<f64>,
    pub fluid: FluidParams,
    pub fixed_point: FixedPointConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.n {
            self.domain.n_rho = n;
            self.domain.n_z = n;
        }
        if let Some(n) = o.n_rho {
            self.domain.n_rho = n;
        }
        if let Some(n) = o.n_z {
            self.domain.n_z = n;
        }
        if o.tolerance.is_some() {
            self.solver.tolerance = o.tolerance;
        }
        if o.residual_tolerance.is_some() {
            self.solver.residual_tolerance = o.residual_tolerance;
        }
        if let Some(e) = o.epsilon {
            self.fluid.epsilon = e;
        }
        if let Some(k) = o.coupling {
            self.fluid.coupling = k;
        }
    }

    pub fn grid(&self) -> Result<MeridianGrid, CliError> {
        let d = &self.domain;
        Ok(MeridianGrid::new(
            d.rho_min, d.rho_max, d.z_min, d.z_max, d.n_rho, d.n_z,
        )?)
    }

    pub fn trace(&self) -> Result<BoundaryTrace, CliError> {
        let table = |pts: &[[f64; 2]]| EdgeTable::new(pts.iter().map(|p| (p[0], p[1])).collect());
        Ok(match &self.boundary {
            BoundaryConfig::Constant { value } => BoundaryTrace::Constant { value: *value },
            BoundaryConfig::LinearZ { slope, offset } => BoundaryTrace::LinearZ {
                slope: *slope,
                offset: *offset,
            },
            BoundaryConfig::Curzon { mass } => BoundaryTrace::Curzon { mass: *mass },
            BoundaryConfig::Dipole { moment } => BoundaryTrace::Dipole { moment: *moment },
            BoundaryConfig::LogRadial { k1, k2 } => BoundaryTrace::LogRadial { k1: *k1, k2: *k2 },
            BoundaryConfig::Table {
                bottom,
                right,
                top,
                left,
            } => BoundaryTrace::Table {
                bottom: table(bottom)?,
                right: table(right)?,
                top: table(top)?,
                left: table(left)?,
            },
        })
    }

    pub fn sources(&self) -> SourcePair {
        match &self.sources {
            SourcesConfig::Zero => SourcePair::Zero,
            SourcesConfig::Polynomial { coefficients } => SourcePair::Polynomial {
                coefficients: coefficients.iter().map(|c| (c[0], c[1])).collect(),
            },
            SourcesConfig::Affine { g, h } => SourcePair::Affine { g: *g, h: *h },
        }
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let d = SolverConfig::default();
        let s = &self.solver;
        let cfg = SolverConfig {
            tolerance: s.tolerance.unwrap_or(d.tolerance),
            max_iterations: s.max_iterations.or(d.max_iterations),
            method: s.method.unwrap_or(d.method),
            omega: s.omega.unwrap_or(d.omega),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        let grid = self.grid()?;
        let a = self.anchor.unwrap_or(AnchorConfig {
            rho: grid.rho_min(),
            z: grid.z_min(),
            gamma: 0.0,
        });
        let anchor = Anchor::snap(&grid, a.rho, a.z, a.gamma)?;
        let boundary = self.trace()?.sample(&grid, anchor)?;
        if let Some(t) = self.solver.residual_tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!(
                    "residual_tolerance must be positive, got {t}"
                )));
            }
        }
        let fluid = FluidParams {
            epsilon: self.fluid.epsilon,
            coupling: self.fluid.coupling,
            viscosity: self.fluid.viscosity,
        };
        fluid.validate()?;
        Ok(Problem {
            grid,
            boundary,
            sources: self.sources(),
            solver: self.solver()?,
            residual_tolerance: self.solver.residual_tolerance,
            fluid,
            fixed_point: FixedPointConfig {
                tolerance: self.fluid.fixed_point_tolerance,
                max_iterations: self.fluid.fixed_point_max_iterations,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CURZON: &str = r#"
[domain]
rho_min = 1.0
rho_max = 2.0
z_min = 0.5
z_max = 1.5
n_rho = 9
n_z = 9

[boundary]
kind = "curzon"
mass = 1.0

[anchor]
rho = 2.0
z = 1.5
gamma = 0.1
"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::from_toml(CURZON).unwrap();
        let p = c.problem().unwrap();
        assert_eq!(p.grid.n_rho(), 9);
        assert_eq!(p.boundary.anchor().gamma, 0.1);
        assert_eq!((p.boundary.anchor().i, p.boundary.anchor().j), (8, 8));
        assert_eq!(p.sources, SourcePair::Zero);
        assert_eq!(p.solver, SolverConfig::default());
        assert_eq!(p.fluid, FluidParams::default());
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::from_toml(CURZON).unwrap();
        c.apply(&Overrides {
            n: Some(17),
            n_z: Some(5),
            tolerance: Some(1e-8),
            epsilon: Some(2.0),
            ..Overrides::default()
        });
        let p = c.problem().unwrap();
        assert_eq!((p.grid.n_rho(), p.grid.n_z()), (17, 5));
        assert_eq!(p.solver.tolerance, 1e-8);
        assert_eq!(p.fluid.epsilon, 2.0);
    }

    #[test]
    fn every_boundary_kind() {
        let dom = "[domain]\nrho_min = 1.0\nrho_max = 2.0\nz_min = 0.0\nz_max = 1.0\nn_rho = 5\nn_z = 5\n";
        for b in [
            "kind = \"constant\"\nvalue = 2.0",
            "kind = \"linear_z\"\nslope = 0.5",
            "kind = \"curzon\"",
            "kind = \"dipole\"\nmoment = 2.0",
            "kind = \"log_radial\"\nk1 = 1.0\nk2 = 0.0",
            "kind = \"table\"\nbottom = [[1.0, 0.0], [2.0, 1.0]]\nright = [[0.0, 1.0]]\ntop = [[1.0, 0.0]]\nleft = [[0.0, 0.0], [1.0, 0.0]]",
        ] {
            let text = format!("{dom}[boundary]\n{b}\n");
            RunConfig::from_toml(&text).unwrap().problem().unwrap();
        }
    }

    #[test]
    fn sources_and_fluid_sections() {
        let text = format!(
            "{CURZON}\n[sources]\nkind = \"polynomial\"\ncoefficients = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]\n\n[fluid]\nepsilon = 1.0\n\n[solver]\nmethod = \"conjugate_gradient\"\nresidual_tolerance = 0.5\n"
        );
        let p = RunConfig::from_toml(&text).unwrap().problem().unwrap();
        assert!(matches!(p.sources, SourcePair::Polynomial { .. }));
        assert_eq!(p.fluid.epsilon, 1.0);
        assert_eq!(p.solver.method, SolverMethod::ConjugateGradient);
        assert_eq!(p.residual_tolerance, Some(0.5));
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(RunConfig::from_toml("[domain]\n").is_err());
        assert!(RunConfig::from_toml(&format!("{CURZON}\n[extra]\nx = 1\n")).is_err());
        let bad = CURZON.replace("n_rho = 9", "n_rho = 2");
        assert!(RunConfig::from_toml(&bad).unwrap().problem().is_err());
        let bad = CURZON.replace("rho = 2.0", "rho = 7.0");
        assert!(RunConfig::from_toml(&bad).unwrap().problem().is_err());
        let bad = format!("{CURZON}\n[fluid]\ncoupling = -1.0\n");
        assert!(RunConfig::from_toml(&bad).unwrap().problem().is_err());
    }
}
