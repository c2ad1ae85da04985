//! Dirichlet problem for the axisymmetric Laplacian `ψ_ρρ + ψ_ρ/ρ + ψ_zz`.
//!
//! Second-order central differences on the meridian grid. Dirichlet values are
//! eliminated into the right-hand side. When the grid touches the axis the
//! ρ = 0 column is part of the unknowns and uses the regularized operator
//! `2ψ_ρρ + ψ_zz` (the limit of `ψ_ρ/ρ` is `ψ_ρρ`) with the even ghost node
//! `ψ(-h) = ψ(h)` folded into the east weight.
//!
//! Two iterative solvers are provided. Lexicographic SOR works on the raw
//! (nonsymmetric) system. Conjugate gradients works on the system multiplied
//! row-wise by ρ (by `h_rho/8` on the axis, the volume of the axis half-cell),
//! which turns `ρψ_ρρ + ψ_ρ` into the self-adjoint `(ρψ_ρ)_ρ` and makes the
//! matrix symmetric. Both iterate on the same discrete equations, so their
//! answers agree to solver tolerance.

use crate::diff;
use crate::grid::{BoundaryData, GridError, MeridianGrid, ScalarField};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("inconsistent grid: {0}")]
    InconsistentGrid(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "solver did not converge after {} iterations (residual {:.3e})",
        .outcome.iterations, .outcome.final_residual
    )]
    NotConverged { outcome: Box<SolveOutcome> },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    Sor,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative bound on the weighted 2-norm of the algebraic residual.
    pub tolerance: f64,
    /// `None` means `10 * (n_rho + n_z)^2`.
    pub max_iterations: Option<usize>,
    pub method: SolverMethod,
    pub omega: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: None,
            method: SolverMethod::Sor,
            omega: 1.9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(SolveError::InvalidConfig(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if !(1.0..2.0).contains(&self.omega) {
            return Err(SolveError::InvalidConfig(format!(
                "omega must lie in [1, 2), got {}",
                self.omega
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(SolveError::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn iteration_limit(&self, grid: &MeridianGrid) -> usize {
        self.max_iterations
            .unwrap_or_else(|| 10 * (grid.n_rho() + grid.n_z()).pow(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Dirichlet,
    Interior,
    Axis,
}

/// Five-point weights acting on `ψ` at (center, ρ-1, ρ+1, z-1, z+1).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stencil {
    pub center: f64,
    pub west: f64,
    pub east: f64,
    pub south: f64,
    pub north: f64,
}

/// The assembled linear system on the full grid. Rows belonging to Dirichlet
/// nodes are empty; couplings to Dirichlet nodes have been moved into `rhs`.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    grid: MeridianGrid,
    roles: Vec<NodeRole>,
    /// Operator weights before elimination.
    full: Vec<Stencil>,
    /// Weights after elimination (Dirichlet neighbours zeroed).
    reduced: Vec<Stencil>,
    rhs: Vec<f64>,
    dirichlet: Vec<f64>,
}

impl DiscreteSystem {
    pub fn grid(&self) -> &MeridianGrid {
        &self.grid
    }
    pub fn role(&self, i: usize, j: usize) -> NodeRole {
        self.roles[self.grid.index(i, j)]
    }
    /// Operator weights at a node, before Dirichlet elimination.
    pub fn stencil(&self, i: usize, j: usize) -> Stencil {
        self.full[self.grid.index(i, j)]
    }
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
    pub fn unknown_count(&self) -> usize {
        self.roles
            .iter()
            .filter(|r| **r != NodeRole::Dirichlet)
            .count()
    }

    fn neighbours(&self, k: usize) -> [usize; 4] {
        let n = self.grid.n_rho();
        // Out-of-range indices only occur where the weight is zero.
        [k.wrapping_sub(1), k + 1, k.wrapping_sub(n), k + n]
    }

    #[inline]
    fn off_diagonal(&self, k: usize, x: &[f64]) -> f64 {
        let s = &self.reduced[k];
        let [w, e, so, no] = self.neighbours(k);
        let mut acc = 0.0;
        if s.west != 0.0 {
            acc += s.west * x[w];
        }
        if s.east != 0.0 {
            acc += s.east * x[e];
        }
        if s.south != 0.0 {
            acc += s.south * x[so];
        }
        if s.north != 0.0 {
            acc += s.north * x[no];
        }
        acc
    }

    /// `rhs - A x` on unknown rows, zero on Dirichlet rows.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|k| match self.roles[k] {
                NodeRole::Dirichlet => 0.0,
                _ => self.rhs[k] - self.reduced[k].center * x[k] - self.off_diagonal(k, x),
            })
            .collect()
    }

    fn weighted_norm(&self, r: &[f64]) -> f64 {
        let area = self.grid.h_rho() * self.grid.h_z();
        (r.iter().map(|v| v * v).sum::<f64>() * area).sqrt()
    }

    /// Row weight that symmetrizes the system.
    fn symmetry_weight(&self, k: usize) -> f64 {
        let (i, _) = self.grid.ij(k);
        match self.roles[k] {
            NodeRole::Axis => self.grid.h_rho() / 8.0,
            _ => self.grid.rho(i),
        }
    }
}

/// Assembles the five-point system for `L ψ = source` with the boundary trace
/// of `boundary` (source defaults to zero).
pub fn discretize(
    grid: &MeridianGrid,
    boundary: &BoundaryData,
    source: Option<&ScalarField>,
) -> Result<DiscreteSystem, SolveError> {
    if boundary.psi_trace().len() != grid.boundary_node_count() {
        return Err(SolveError::InconsistentGrid(format!(
            "boundary trace has {} values, grid has {} boundary nodes",
            boundary.psi_trace().len(),
            grid.boundary_node_count()
        )));
    }
    if let Some(src) = source {
        if src.grid() != grid {
            return Err(SolveError::InconsistentGrid(
                "source field lives on a different grid".into(),
            ));
        }
    }
    let (nr, nz) = (grid.n_rho(), grid.n_z());
    let (hr, hz) = (grid.h_rho(), grid.h_z());
    let (ihr2, ihz2) = (1.0 / (hr * hr), 1.0 / (hz * hz));

    let mut roles = vec![NodeRole::Dirichlet; grid.len()];
    for j in 1..nz - 1 {
        for i in 1..nr - 1 {
            roles[grid.index(i, j)] = NodeRole::Interior;
        }
        if grid.axis_touching() {
            roles[grid.index(0, j)] = NodeRole::Axis;
        }
    }

    let dirichlet = boundary.to_field(grid, 0.0).into_values();
    let mut full = vec![Stencil::default(); grid.len()];
    for k in 0..grid.len() {
        let (i, _) = grid.ij(k);
        full[k] = match roles[k] {
            NodeRole::Dirichlet => Stencil::default(),
            NodeRole::Interior => {
                let adv = 1.0 / (2.0 * grid.rho(i) * hr);
                Stencil {
                    center: -2.0 * ihr2 - 2.0 * ihz2,
                    west: ihr2 - adv,
                    east: ihr2 + adv,
                    south: ihz2,
                    north: ihz2,
                }
            }
            NodeRole::Axis => Stencil {
                center: -4.0 * ihr2 - 2.0 * ihz2,
                west: 0.0,
                east: 4.0 * ihr2,
                south: ihz2,
                north: ihz2,
            },
        };
    }

    let mut reduced = full.clone();
    let mut rhs = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        if roles[k] == NodeRole::Dirichlet {
            continue;
        }
        let mut b = source.map_or(0.0, |s| s.values()[k]);
        let n = nr;
        let s = &mut reduced[k];
        let mut eliminate = |weight: &mut f64, nb: usize| {
            if *weight != 0.0 && roles[nb] == NodeRole::Dirichlet {
                b -= *weight * dirichlet[nb];
                *weight = 0.0;
            }
        };
        eliminate(&mut s.west, k.wrapping_sub(1).min(grid.len() - 1));
        eliminate(&mut s.east, k + 1);
        eliminate(&mut s.south, k - n);
        eliminate(&mut s.north, k + n);
        rhs[k] = b;
    }

    Ok(DiscreteSystem {
        grid: *grid,
        roles,
        full,
        reduced,
        rhs,
        dirichlet,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialGuess {
    #[default]
    Zero,
    BoundaryMean,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub psi: ScalarField,
    pub iterations: usize,
    /// Weighted 2-norm of the algebraic residual of the initial guess.
    pub initial_residual: f64,
    /// Weighted 2-norm of the final algebraic residual.
    pub final_residual: f64,
    /// `tolerance * (initial_residual + |rhs|)`.
    pub threshold: f64,
    /// Max-principle bound on the sup-norm distance to the exact discrete
    /// solution, `C * max |residual|` (see [`error_bound_factor`]).
    pub error_bound: f64,
    /// `tolerance * (max |ψ_Γ| + C * max |source|)`.
    pub error_threshold: f64,
    pub converged: bool,
}

/// Constant `C` with `max |ψ − ψ*| ≤ C max |A ψ − b|` for the discrete
/// operator. The comparison functions `(z − z_min)(z − z_max)/2` and
/// `(ρ² − ρ_max²)/4` are mapped to 1 exactly by the stencil (interior and
/// axis rows alike) and the system is an M-matrix, so the discrete maximum
/// principle gives `C = min(L_z²/8, (ρ_max² − ρ_min²)/4)`.
pub fn error_bound_factor(grid: &MeridianGrid) -> f64 {
    let lz = grid.z_max() - grid.z_min();
    (lz * lz / 8.0).min((grid.rho_max().powi(2) - grid.rho_min().powi(2)) / 4.0)
}

/// Solves the homogeneous problem `ψ_ρρ + ψ_ρ/ρ + ψ_zz = 0`, `ψ = ψ_Γ` on Γ.
pub fn solve_psi(
    grid: &MeridianGrid,
    boundary: &BoundaryData,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    let system = discretize(grid, boundary, None)?;
    solve_system(
        &system,
        config,
        Start::Guess(InitialGuess::Zero),
        boundary,
        0.0,
    )
}

/// Solves `ψ_ρρ + ψ_ρ/ρ + ψ_zz = source` with the Dirichlet trace.
pub fn solve_poisson(
    grid: &MeridianGrid,
    boundary: &BoundaryData,
    source: Option<&ScalarField>,
    config: &SolverConfig,
    guess: InitialGuess,
) -> Result<SolveOutcome, SolveError> {
    let system = discretize(grid, boundary, source)?;
    let smax = source.map_or(0.0, |s| s.max_abs());
    solve_system(&system, config, Start::Guess(guess), boundary, smax)
}

/// As [`solve_poisson`] but starting from an existing field (warm start).
pub fn solve_poisson_from(
    grid: &MeridianGrid,
    boundary: &BoundaryData,
    source: Option<&ScalarField>,
    config: &SolverConfig,
    start: &ScalarField,
) -> Result<SolveOutcome, SolveError> {
    if start.grid() != grid {
        return Err(SolveError::InconsistentGrid(
            "initial field lives on a different grid".into(),
        ));
    }
    let system = discretize(grid, boundary, source)?;
    let smax = source.map_or(0.0, |s| s.max_abs());
    solve_system(
        &system,
        config,
        Start::Field(start.values()),
        boundary,
        smax,
    )
}

enum Start<'a> {
    Guess(InitialGuess),
    Field(&'a [f64]),
}

/// Both stopping conditions: relative weighted 2-norm and max-principle bound.
struct Stopping {
    threshold: f64,
    bound_factor: f64,
    error_threshold: f64,
}

impl Stopping {
    fn measure(&self, system: &DiscreteSystem, x: &[f64]) -> (f64, f64) {
        let r = system.residual(x);
        let sup = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (system.weighted_norm(&r), self.bound_factor * sup)
    }

    fn met(&self, (res, bound): (f64, f64)) -> bool {
        res <= self.threshold && bound <= self.error_threshold
    }
}

fn solve_system(
    system: &DiscreteSystem,
    config: &SolverConfig,
    start: Start<'_>,
    boundary: &BoundaryData,
    source_max: f64,
) -> Result<SolveOutcome, SolveError> {
    config.validate()?;
    let grid = system.grid;
    let mut x = system.dirichlet.clone();
    for k in 0..x.len() {
        if system.roles[k] != NodeRole::Dirichlet {
            x[k] = match &start {
                Start::Guess(InitialGuess::Zero) => 0.0,
                Start::Guess(InitialGuess::BoundaryMean) => boundary.trace_mean(),
                Start::Field(f) => f[k],
            };
        }
    }

    let bound_factor = error_bound_factor(&grid);
    let data_scale = boundary
        .psi_trace()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        + bound_factor * source_max;
    let scale = system.weighted_norm(&system.rhs);
    let mut stop = Stopping {
        threshold: 0.0,
        bound_factor,
        error_threshold: config.tolerance * data_scale,
    };
    let initial = stop.measure(system, &x);
    stop.threshold = config.tolerance * (initial.0 + scale);
    let limit = config.iteration_limit(&grid);

    let (iterations, (final_residual, error_bound)) = match config.method {
        SolverMethod::Sor => sor(system, &mut x, config.omega, &stop, limit, initial),
        SolverMethod::ConjugateGradient => {
            conjugate_gradient(system, &mut x, &stop, limit, initial)
        }
    };

    let converged = stop.met((final_residual, error_bound));
    let outcome = SolveOutcome {
        psi: ScalarField::from_raw(grid, x, "psi"),
        iterations,
        initial_residual: initial.0,
        final_residual,
        threshold: stop.threshold,
        error_bound,
        error_threshold: stop.error_threshold,
        converged,
    };
    if outcome.converged && outcome.psi.values().iter().all(|v| v.is_finite()) {
        Ok(outcome)
    } else {
        Err(SolveError::NotConverged {
            outcome: Box::new(SolveOutcome {
                converged: false,
                ..outcome
            }),
        })
    }
}

fn sor(
    system: &DiscreteSystem,
    x: &mut [f64],
    omega: f64,
    stop: &Stopping,
    limit: usize,
    initial: (f64, f64),
) -> (usize, (f64, f64)) {
    if stop.met(initial) {
        return (0, initial);
    }
    let unknowns: Vec<usize> = (0..x.len())
        .filter(|&k| system.roles[k] != NodeRole::Dirichlet)
        .collect();
    let mut m = initial;
    for it in 1..=limit {
        for &k in &unknowns {
            let gs = (system.rhs[k] - system.off_diagonal(k, x)) / system.reduced[k].center;
            x[k] += omega * (gs - x[k]);
        }
        m = stop.measure(system, x);
        if stop.met(m) || !m.0.is_finite() {
            return (it, m);
        }
    }
    (limit, m)
}

/// Jacobi-preconditioned CG on the ρ-weighted (symmetric positive definite)
/// form `-W A x = -W b`.
fn conjugate_gradient(
    system: &DiscreteSystem,
    x: &mut [f64],
    stop: &Stopping,
    limit: usize,
    initial: (f64, f64),
) -> (usize, (f64, f64)) {
    if stop.met(initial) {
        return (0, initial);
    }
    let n = x.len();
    let active: Vec<usize> = (0..n)
        .filter(|&k| system.roles[k] != NodeRole::Dirichlet)
        .collect();
    let w: Vec<f64> = (0..n).map(|k| system.symmetry_weight(k)).collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        for &k in &active {
            out[k] = -w[k] * (system.reduced[k].center * v[k] + system.off_diagonal(k, v));
        }
    };
    let diag: Vec<f64> = (0..n).map(|k| -w[k] * system.reduced[k].center).collect();

    // Symmetrized residual r_s = -W (b - A x); the raw residual is -r_s / W.
    let mut r = vec![0.0; n];
    for (k, v) in system.residual(x).into_iter().enumerate() {
        if system.roles[k] != NodeRole::Dirichlet {
            r[k] = -w[k] * v;
        }
    }
    let area = system.grid.h_rho() * system.grid.h_z();
    let raw = |r: &[f64]| {
        let mut sq = 0.0;
        let mut sup = 0.0f64;
        for &k in &active {
            let v = r[k] / w[k];
            sq += v * v;
            sup = sup.max(v.abs());
        }
        ((sq * area).sqrt(), stop.bound_factor * sup)
    };
    let mut z = vec![0.0; n];
    for &k in &active {
        z[k] = r[k] / diag[k];
    }
    let mut p = z.clone();
    let mut rz: f64 = active.iter().map(|&k| r[k] * z[k]).sum();
    let mut ap = vec![0.0; n];
    let mut m = initial;
    for it in 1..=limit {
        apply(&p, &mut ap);
        let pap: f64 = active.iter().map(|&k| p[k] * ap[k]).sum();
        if pap <= 0.0 || !pap.is_finite() {
            return (it, stop.measure(system, x));
        }
        let alpha = rz / pap;
        for &k in &active {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        m = raw(&r);
        if stop.met(m) {
            // The recursive residual drifts; confirm with the true one.
            m = stop.measure(system, x);
            if stop.met(m) {
                return (it, m);
            }
        }
        for &k in &active {
            z[k] = r[k] / diag[k];
        }
        let rz_new: f64 = active.iter().map(|&k| r[k] * z[k]).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for &k in &active {
            p[k] = z[k] + beta * p[k];
        }
    }
    (limit, m)
}

/// Discrete operator applied to `psi`: the five-point axisymmetric Laplacian
/// at interior nodes, the regularized axis operator on the ρ = 0 column of
/// axis-touching grids, zero on the remaining boundary nodes.
pub fn operator_residual(psi: &ScalarField, grid: &MeridianGrid) -> ScalarField {
    let f = psi.values();
    let mut out = vec![0.0; grid.len()];
    for (i, j) in grid.interior_nodes() {
        out[grid.index(i, j)] = diff::axisymmetric_laplacian(grid, f, i, j);
    }
    if grid.axis_touching() {
        let hr = grid.h_rho();
        for j in 1..grid.n_z() - 1 {
            let c = f[grid.index(0, j)];
            let axis_rr = 2.0 * (f[grid.index(1, j)] - c) / (hr * hr);
            out[grid.index(0, j)] = 2.0 * axis_rr + diff::central_z_z(grid, f, 0, j);
        }
    }
    ScalarField::from_raw(*grid, out, "operator_residual")
}
