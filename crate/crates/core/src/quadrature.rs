//! Reconstruction of γ from ψ by integrating an exact differential.
//!
//! Given ψ and the source pair (g, h), the first-order system
//!
//! ```text
//! γ_ρ = F = ρ (ψ_ρ² − ψ_z² − g)
//! γ_z = G = ρ (2 ψ_ρ ψ_z − h)
//! ```
//!
//! is integrable exactly when `G_ρ = F_z`. With ψ axisymmetric-harmonic this
//! reduces to `(ρh)_ρ = (ρg)_z`, one half of the Cauchy–Riemann pair for
//! `ρh + iρg`; the other half, `(ρh)_z = −(ρg)_ρ`, is what makes the
//! reconstructed γ satisfy `ψ_ρ² + ψ_z² + γ_ρρ + γ_zz = 0`.
//!
//! γ is obtained by trapezoidal integration along grid-aligned staircase
//! paths from the anchor. Discretely the fields are exact only to truncation
//! order, so the path dependence is measured rather than assumed away.

use crate::diff;
use crate::grid::{Anchor, GridError, MeridianGrid, ScalarField};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("source pair is singular on the axis; use an annular grid")]
    SingularOnAxis,
    #[error("source field lives on a different grid")]
    SourceGridMismatch,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Right-hand sides (g, h) of the generalized first-order system.
#[derive(Debug, Clone, PartialEq)]
pub enum SourcePair {
    /// g = h = 0, the vacuum case.
    Zero,
    /// `ρh + iρg = Σ c_k w^k` with `w = ρ + iz` and complex `c_k = (re, im)`.
    /// Analytic by construction; h and g carry a `1/ρ` so annular grids only.
    Polynomial { coefficients: Vec<(f64, f64)> },
    /// `g = g0 + g_rho ρ + g_z z`, `h = h0 + h_rho ρ + h_z z`; analytic or not
    /// depending on the coefficients.
    Affine { g: [f64; 3], h: [f64; 3] },
    /// Pre-sampled fields.
    Sampled { g: ScalarField, h: ScalarField },
}

impl SourcePair {
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Polynomial { coefficients } => {
                coefficients.iter().all(|&(a, b)| a == 0.0 && b == 0.0)
            }
            Self::Affine { g, h } => g.iter().chain(h).all(|c| *c == 0.0),
            Self::Sampled { g, h } => g.values().iter().chain(h.values()).all(|v| *v == 0.0),
        }
    }

    /// `(g, h)` at one point.
    pub fn eval(&self, rho: f64, z: f64) -> (f64, f64) {
        match self {
            Self::Zero => (0.0, 0.0),
            Self::Polynomial { coefficients } => {
                let (u, v) = complex_poly(coefficients, rho, z);
                (v / rho, u / rho)
            }
            Self::Affine { g, h } => (g[0] + g[1] * rho + g[2] * z, h[0] + h[1] * rho + h[2] * z),
            Self::Sampled { .. } => unreachable!("sampled sources are evaluated per node"),
        }
    }

    /// `(g, h)` at every node.
    pub fn sample(&self, grid: &MeridianGrid) -> Result<(Vec<f64>, Vec<f64>), QuadratureError> {
        match self {
            Self::Zero => Ok((vec![0.0; grid.len()], vec![0.0; grid.len()])),
            Self::Sampled { g, h } => {
                if g.grid() != grid || h.grid() != grid {
                    return Err(QuadratureError::SourceGridMismatch);
                }
                Ok((g.values().to_vec(), h.values().to_vec()))
            }
            Self::Polynomial { .. } if grid.axis_touching() && !self.is_zero() => {
                Err(QuadratureError::SingularOnAxis)
            }
            _ => Ok((0..grid.len())
                .map(|k| {
                    let (rho, z) = grid.coords(k);
                    self.eval(rho, z)
                })
                .unzip()),
        }
    }
}

/// Evaluates `Σ c_k w^k` at `w = rho + i z`, returning (real, imaginary).
fn complex_poly(coefficients: &[(f64, f64)], rho: f64, z: f64) -> (f64, f64) {
    // Horner from the highest power.
    let (mut re, mut im) = (0.0, 0.0);
    for &(a, b) in coefficients.iter().rev() {
        let (r2, i2) = (re * rho - im * z, re * z + im * rho);
        re = r2 + a;
        im = i2 + b;
    }
    (re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticityReport {
    /// sup |(ρh)_ρ − (ρg)_z| over interior nodes.
    pub r1_sup: f64,
    /// sup |(ρh)_z + (ρg)_ρ| over interior nodes.
    pub r2_sup: f64,
    pub threshold: f64,
    pub certified: bool,
}

/// Default certification threshold: `10 h² max(|ρh|, |ρg|, 1)`.
pub fn default_analyticity_threshold(grid: &MeridianGrid, rho_h: &[f64], rho_g: &[f64]) -> f64 {
    let scale = rho_h
        .iter()
        .chain(rho_g)
        .fold(1.0f64, |m, v| m.max(v.abs()));
    10.0 * grid.h_max().powi(2) * scale
}

/// Discrete Cauchy–Riemann residuals of the pair `(ρh, ρg)`.
pub fn check_analyticity(
    sources: &SourcePair,
    grid: &MeridianGrid,
    threshold: Option<f64>,
) -> Result<AnalyticityReport, QuadratureError> {
    let (g, h) = sources.sample(grid)?;
    let rho_h: Vec<f64> = (0..grid.len()).map(|k| grid.coords(k).0 * h[k]).collect();
    let rho_g: Vec<f64> = (0..grid.len()).map(|k| grid.coords(k).0 * g[k]).collect();
    let threshold =
        threshold.unwrap_or_else(|| default_analyticity_threshold(grid, &rho_h, &rho_g));
    let (mut r1_sup, mut r2_sup) = (0.0f64, 0.0f64);
    for (i, j) in grid.interior_nodes() {
        let r1 = diff::central_rho(grid, &rho_h, i, j) - diff::central_z(grid, &rho_g, i, j);
        let r2 = diff::central_z(grid, &rho_h, i, j) + diff::central_rho(grid, &rho_g, i, j);
        r1_sup = r1_sup.max(r1.abs());
        r2_sup = r2_sup.max(r2.abs());
    }
    Ok(AnalyticityReport {
        r1_sup,
        r2_sup,
        threshold,
        certified: r1_sup <= threshold && r2_sup <= threshold,
    })
}

/// The right-hand sides `F = γ_ρ` and `G = γ_z`.
#[derive(Debug, Clone)]
pub struct GradientFields {
    pub f: ScalarField,
    pub g: ScalarField,
}

impl GradientFields {
    pub fn new(f: ScalarField, g: ScalarField) -> Self {
        assert_eq!(f.grid(), g.grid(), "gradient fields on different grids");
        Self { f, g }
    }

    pub fn grid(&self) -> &MeridianGrid {
        self.f.grid()
    }

    pub fn scale(&self) -> f64 {
        self.f.max_abs().max(self.g.max_abs()).max(1.0)
    }
}

pub fn build_gradient_fields(
    psi: &ScalarField,
    sources: &SourcePair,
    grid: &MeridianGrid,
) -> Result<GradientFields, QuadratureError> {
    let (g_src, h_src) = sources.sample(grid)?;
    let p = psi.values();
    let pr = diff::d_rho(grid, p);
    let pz = diff::d_z(grid, p);
    let mut f = vec![0.0; grid.len()];
    let mut g = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let (rho, _) = grid.coords(k);
        f[k] = rho * (pr[k] * pr[k] - pz[k] * pz[k] - g_src[k]);
        g[k] = rho * (2.0 * pr[k] * pz[k] - h_src[k]);
    }
    Ok(GradientFields {
        f: ScalarField::from_raw(*grid, f, "F"),
        g: ScalarField::from_raw(*grid, g, "G"),
    })
}

#[derive(Debug, Clone)]
pub struct ExactnessReport {
    /// `G_ρ − F_z` on interior nodes, zero elsewhere.
    pub defect: ScalarField,
    pub sup_norm: f64,
    pub rms_norm: f64,
    pub threshold: f64,
    pub integrable: bool,
}

/// Default exactness threshold `10 h² max(|F|, |G|, 1)`.
pub fn default_exactness_threshold(fields: &GradientFields) -> f64 {
    10.0 * fields.grid().h_max().powi(2) * fields.scale()
}

/// Node-centred curl `G_ρ − F_z` by central differences.
pub fn curl_defect(fields: &GradientFields) -> ScalarField {
    let grid = fields.grid();
    let mut out = vec![0.0; grid.len()];
    for (i, j) in grid.interior_nodes() {
        out[grid.index(i, j)] = diff::central_rho(grid, fields.g.values(), i, j)
            - diff::central_z(grid, fields.f.values(), i, j);
    }
    ScalarField::from_raw(*grid, out, "curl_defect")
}

pub fn check_exactness(fields: &GradientFields, threshold: Option<f64>) -> ExactnessReport {
    let threshold = threshold.unwrap_or_else(|| default_exactness_threshold(fields));
    let defect = curl_defect(fields);
    let sup_norm = defect.interior_sup();
    let rms_norm = defect.interior_rms();
    ExactnessReport {
        defect,
        sup_norm,
        rms_norm,
        threshold,
        integrable: sup_norm <= threshold,
    }
}

/// Cumulative trapezoid along a line of `n` samples starting at `start`.
fn cumulative_trapezoid(n: usize, start: usize, h: f64, value: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for s in start + 1..n {
        out[s] = out[s - 1] + 0.5 * h * (value(s - 1) + value(s));
    }
    for s in (0..start).rev() {
        out[s] = out[s + 1] - 0.5 * h * (value(s) + value(s + 1));
    }
    out
}

/// γ along the ρ-then-z staircase: along ρ on the anchor's row to the
/// target column, then along z to the target row.
pub fn integrate_gamma(fields: &GradientFields, anchor: &Anchor) -> ScalarField {
    staircase(fields, anchor, true)
}

/// γ along the z-then-ρ staircase.
pub fn integrate_gamma_z_first(fields: &GradientFields, anchor: &Anchor) -> ScalarField {
    staircase(fields, anchor, false)
}

fn staircase(fields: &GradientFields, anchor: &Anchor, rho_first: bool) -> ScalarField {
    let grid = *fields.grid();
    let (nr, nz) = (grid.n_rho(), grid.n_z());
    let (f, g) = (fields.f.values(), fields.g.values());
    let mut gamma = vec![0.0; grid.len()];
    if rho_first {
        let row = cumulative_trapezoid(nr, anchor.i, grid.h_rho(), |i| f[grid.index(i, anchor.j)]);
        for (i, &base) in row.iter().enumerate() {
            let col = cumulative_trapezoid(nz, anchor.j, grid.h_z(), |j| g[grid.index(i, j)]);
            for (j, c) in col.into_iter().enumerate() {
                gamma[grid.index(i, j)] = anchor.gamma + (base + c);
            }
        }
    } else {
        let col = cumulative_trapezoid(nz, anchor.j, grid.h_z(), |j| g[grid.index(anchor.i, j)]);
        for (j, &base) in col.iter().enumerate() {
            let row = cumulative_trapezoid(nr, anchor.i, grid.h_rho(), |i| f[grid.index(i, j)]);
            for (i, r) in row.into_iter().enumerate() {
                gamma[grid.index(i, j)] = anchor.gamma + (base + r);
            }
        }
    }
    gamma[grid.index(anchor.i, anchor.j)] = anchor.gamma;
    ScalarField::from_raw(grid, gamma, "gamma")
}

/// Pointwise difference between the two staircase reconstructions.
pub fn path_difference(fields: &GradientFields, anchor: &Anchor) -> ScalarField {
    let a = integrate_gamma(fields, anchor);
    let b = integrate_gamma_z_first(fields, anchor);
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x - y)
        .collect();
    ScalarField::from_raw(*fields.grid(), values, "path_difference")
}

/// Sup-norm of [`path_difference`].
pub fn path_independence_check(fields: &GradientFields, anchor: &Anchor) -> f64 {
    path_difference(fields, anchor).max_abs()
}

/// Counter-clockwise trapezoidal circulation of `(F, G)` around each grid
/// cell, indexed `ci + cj * (n_rho - 1)`. Divided by the cell area it is a
/// compact cell-centred approximation of `G_ρ − F_z`.
pub fn cell_circulation(fields: &GradientFields) -> Vec<f64> {
    let grid = fields.grid();
    let (f, g) = (fields.f.values(), fields.g.values());
    let (hr, hz) = (grid.h_rho(), grid.h_z());
    let mut out = Vec::with_capacity((grid.n_rho() - 1) * (grid.n_z() - 1));
    for j in 0..grid.n_z() - 1 {
        for i in 0..grid.n_rho() - 1 {
            let at = |a: &[f64], ii: usize, jj: usize| a[grid.index(ii, jj)];
            let bottom = 0.5 * hr * (at(f, i, j) + at(f, i + 1, j));
            let right = 0.5 * hz * (at(g, i + 1, j) + at(g, i + 1, j + 1));
            let top = 0.5 * hr * (at(f, i, j + 1) + at(f, i + 1, j + 1));
            let left = 0.5 * hz * (at(g, i, j) + at(g, i, j + 1));
            out.push(bottom + right - top - left);
        }
    }
    out
}

/// For every node, the cell-centred curl integrated over the rectangle spanned
/// by the anchor and the node, oriented so that it equals
/// `γ_ρ-first − γ_z-first` (discrete Green's theorem).
pub fn enclosed_circulation(fields: &GradientFields, anchor: &Anchor) -> ScalarField {
    let grid = *fields.grid();
    let cells = cell_circulation(fields);
    let (cr, cz) = (grid.n_rho() - 1, grid.n_z() - 1);
    // prefix[(i, j)] = sum of cells with ci < i, cj < j.
    let pw = cr + 1;
    let mut prefix = vec![0.0; pw * (cz + 1)];
    for j in 0..cz {
        let mut row = 0.0;
        for i in 0..cr {
            row += cells[i + j * cr];
            prefix[(i + 1) + (j + 1) * pw] = prefix[(i + 1) + j * pw] + row;
        }
    }
    let rect = |i0: usize, i1: usize, j0: usize, j1: usize| {
        prefix[i1 + j1 * pw] - prefix[i0 + j1 * pw] - prefix[i1 + j0 * pw] + prefix[i0 + j0 * pw]
    };
    let mut out = vec![0.0; grid.len()];
    for j in 0..grid.n_z() {
        for i in 0..grid.n_rho() {
            let sign = match (i.cmp(&anchor.i), j.cmp(&anchor.j)) {
                (std::cmp::Ordering::Equal, _) | (_, std::cmp::Ordering::Equal) => continue,
                (a, b) if a == b => 1.0,
                _ => -1.0,
            };
            let (i0, i1) = (i.min(anchor.i), i.max(anchor.i));
            let (j0, j1) = (j.min(anchor.j), j.max(anchor.j));
            out[grid.index(i, j)] = sign * rect(i0, i1, j0, j1);
        }
    }
    ScalarField::from_raw(grid, out, "enclosed_circulation")
}

/// ψ → (F, G) → γ in one call.
pub fn reconstruct_gamma(
    psi: &ScalarField,
    sources: &SourcePair,
    anchor: &Anchor,
) -> Result<(GradientFields, ScalarField), QuadratureError> {
    let fields = build_gradient_fields(psi, sources, psi.grid())?;
    let gamma = integrate_gamma(&fields, anchor);
    Ok((fields, gamma))
}
