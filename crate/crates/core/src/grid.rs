//! Meridian-plane grids, boundary traces and grid-sampled fields.
//!
//! The computational domain is the intersection of an axisymmetric body with a
//! half-plane containing the symmetry axis. Only rectangles in the (ρ, z)
//! plane are supported: either touching the axis (`rho_min == 0`) or annular
//! (`rho_min > 0`). Rectangles are simply connected, which is all the
//! potential reconstruction needs; general star-shaped sections are not
//! handled and are not silently treated as equivalent.
//!
//! Node `(i, j)` lives at flat index `k = j * n_rho + i` with coordinates
//! `(rho_min + i * h_rho, z_min + j * h_z)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("non-positive extent: {axis} range [{min}, {max}]")]
    NonPositiveExtent {
        axis: &'static str,
        min: f64,
        max: f64,
    },
    #[error("too few nodes along {axis}: {count} (need at least 3)")]
    TooFewNodes { axis: &'static str, count: usize },
    #[error("negative rho_min = {0}")]
    NegativeRho(f64),
    #[error("boundary trace is not finite at (rho, z) = ({rho}, {z})")]
    NonFiniteTrace { rho: f64, z: f64 },
    #[error("boundary trace has {got} values, grid has {expected} boundary nodes")]
    TraceLength { expected: usize, got: usize },
    #[error("anchor ({rho}, {z}) lies outside the grid rectangle")]
    AnchorOutside { rho: f64, z: f64 },
    #[error("field '{name}' has a non-finite value at node {index}")]
    NonFiniteField { name: String, index: usize },
    #[error("field '{name}' has {got} values, grid has {expected} nodes")]
    FieldLength {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid edge table: {0}")]
    InvalidTable(String),
    #[error("trace '{kind}' is singular on the axis; use an annular grid")]
    SingularOnAxis { kind: &'static str },
}

/// Tensor-product grid over a rectangle of the meridian half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeridianGrid {
    rho_min: f64,
    rho_max: f64,
    z_min: f64,
    z_max: f64,
    n_rho: usize,
    n_z: usize,
    h_rho: f64,
    h_z: f64,
}

impl MeridianGrid {
    pub fn new(
        rho_min: f64,
        rho_max: f64,
        z_min: f64,
        z_max: f64,
        n_rho: usize,
        n_z: usize,
    ) -> Result<Self, GridError> {
        if !(rho_min.is_finite() && rho_max.is_finite() && rho_max > rho_min) {
            return Err(GridError::NonPositiveExtent {
                axis: "rho",
                min: rho_min,
                max: rho_max,
            });
        }
        if !(z_min.is_finite() && z_max.is_finite() && z_max > z_min) {
            return Err(GridError::NonPositiveExtent {
                axis: "z",
                min: z_min,
                max: z_max,
            });
        }
        if rho_min < 0.0 {
            return Err(GridError::NegativeRho(rho_min));
        }
        if n_rho < 3 {
            return Err(GridError::TooFewNodes {
                axis: "rho",
                count: n_rho,
            });
        }
        if n_z < 3 {
            return Err(GridError::TooFewNodes {
                axis: "z",
                count: n_z,
            });
        }
        Ok(Self {
            rho_min,
            rho_max,
            z_min,
            z_max,
            n_rho,
            n_z,
            h_rho: (rho_max - rho_min) / (n_rho - 1) as f64,
            h_z: (z_max - z_min) / (n_z - 1) as f64,
        })
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }
    pub fn z_min(&self) -> f64 {
        self.z_min
    }
    pub fn z_max(&self) -> f64 {
        self.z_max
    }
    pub fn n_rho(&self) -> usize {
        self.n_rho
    }
    pub fn n_z(&self) -> usize {
        self.n_z
    }
    pub fn h_rho(&self) -> f64 {
        self.h_rho
    }
    pub fn h_z(&self) -> f64 {
        self.h_z
    }
    /// Larger of the two spacings.
    pub fn h_max(&self) -> f64 {
        self.h_rho.max(self.h_z)
    }

    pub fn len(&self) -> usize {
        self.n_rho * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the left edge of the rectangle is the symmetry axis.
    pub fn axis_touching(&self) -> bool {
        self.rho_min == 0.0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_rho + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n_rho, k / self.n_rho)
    }

    #[inline]
    pub fn rho(&self, i: usize) -> f64 {
        self.rho_min + i as f64 * self.h_rho
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        self.z_min + j as f64 * self.h_z
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.rho(i), self.z(j))
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.n_rho || j + 1 == self.n_z
    }

    /// Nodes with all four neighbours inside the grid.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        !self.is_boundary(i, j)
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n_z - 1).flat_map(move |j| (1..self.n_rho - 1).map(move |i| (i, j)))
    }

    pub fn boundary_node_count(&self) -> usize {
        2 * self.n_rho + 2 * self.n_z - 4
    }

    /// Boundary nodes in traversal order: bottom edge left to right, right
    /// edge bottom to top, top edge right to left, left edge top to bottom.
    /// Every corner appears exactly once.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize, Edge)> {
        let (nr, nz) = (self.n_rho, self.n_z);
        let mut out = Vec::with_capacity(self.boundary_node_count());
        for i in 0..nr {
            out.push((i, 0, Edge::Bottom));
        }
        for j in 1..nz {
            out.push((nr - 1, j, Edge::Right));
        }
        for i in (0..nr - 1).rev() {
            out.push((i, nz - 1, Edge::Top));
        }
        for j in (1..nz - 1).rev() {
            out.push((0, j, Edge::Left));
        }
        out
    }

    /// Does the other grid describe the same nodes (to a relative tolerance)?
    pub fn matches(&self, other: &MeridianGrid, rel_tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel_tol * (1.0 + a.abs().max(b.abs()));
        self.n_rho == other.n_rho
            && self.n_z == other.n_z
            && close(self.rho_min, other.rho_min)
            && close(self.rho_max, other.rho_max)
            && close(self.z_min, other.z_min)
            && close(self.z_max, other.z_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    Bottom,
    Right,
    Top,
    Left,
}

/// Grid-sampled real function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: MeridianGrid,
    values: Vec<f64>,
    name: String,
}

impl ScalarField {
    pub fn new(
        grid: MeridianGrid,
        values: Vec<f64>,
        name: impl Into<String>,
    ) -> Result<Self, GridError> {
        let name = name.into();
        if values.len() != grid.len() {
            return Err(GridError::FieldLength {
                name,
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteField { name, index });
        }
        Ok(Self { grid, values, name })
    }

    pub fn constant(grid: MeridianGrid, value: f64, name: impl Into<String>) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
            name: name.into(),
        }
    }

    /// Samples `f(rho, z)` at every node.
    pub fn from_fn(
        grid: MeridianGrid,
        name: impl Into<String>,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let values = (0..grid.len())
            .map(|k| {
                let (rho, z) = grid.coords(k);
                f(rho, z)
            })
            .collect();
        Self::new(grid, values, name)
    }

    /// Internal constructor for values already known to be finite or where
    /// non-finite values must be reported downstream rather than rejected.
    pub(crate) fn from_raw(grid: MeridianGrid, values: Vec<f64>, name: &str) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            name: name.to_string(),
        }
    }

    pub fn grid(&self) -> &MeridianGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute value over interior nodes.
    pub fn interior_sup(&self) -> f64 {
        self.grid
            .interior_nodes()
            .fold(0.0, |m, (i, j)| m.max(self.at(i, j).abs()))
    }

    /// Root mean square over interior nodes.
    pub fn interior_rms(&self) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (i, j) in self.grid.interior_nodes() {
            let v = self.at(i, j);
            sum += v * v;
            n += 1;
        }
        (sum / n as f64).sqrt()
    }

    /// Largest absolute pointwise difference to another field on the same grid.
    pub fn sup_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Point that fixes the additive constant of γ, snapped onto the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anchor {
    pub i: usize,
    pub j: usize,
    pub rho: f64,
    pub z: f64,
    pub gamma: f64,
    /// Distance between the requested point and the node it was snapped to.
    pub snap_distance: f64,
}

impl Anchor {
    /// Snaps `(rho, z)` to the nearest grid node. Points outside the closed
    /// rectangle are rejected.
    pub fn snap(grid: &MeridianGrid, rho: f64, z: f64, gamma: f64) -> Result<Self, GridError> {
        let slack = 1e-12 * (1.0 + grid.rho_max().abs().max(grid.z_max().abs()));
        let inside = rho >= grid.rho_min() - slack
            && rho <= grid.rho_max() + slack
            && z >= grid.z_min() - slack
            && z <= grid.z_max() + slack;
        if !(inside && gamma.is_finite()) {
            return Err(GridError::AnchorOutside { rho, z });
        }
        let i = (((rho - grid.rho_min()) / grid.h_rho()).round().max(0.0) as usize)
            .min(grid.n_rho() - 1);
        let j = (((z - grid.z_min()) / grid.h_z()).round().max(0.0) as usize).min(grid.n_z() - 1);
        Ok(Self::at_node(grid, i, j, gamma).with_snap(rho, z))
    }

    pub fn at_node(grid: &MeridianGrid, i: usize, j: usize, gamma: f64) -> Self {
        Self {
            i,
            j,
            rho: grid.rho(i),
            z: grid.z(j),
            gamma,
            snap_distance: 0.0,
        }
    }

    fn with_snap(mut self, rho: f64, z: f64) -> Self {
        self.snap_distance = (self.rho - rho).hypot(self.z - z);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Dirichlet trace of ψ on the grid boundary plus the γ anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    psi_trace: Vec<f64>,
    anchor: Anchor,
}

impl BoundaryData {
    /// Wraps trace values given in [`MeridianGrid::boundary_nodes`] order.
    pub fn new(
        grid: &MeridianGrid,
        psi_trace: Vec<f64>,
        anchor: Anchor,
    ) -> Result<Self, GridError> {
        if psi_trace.len() != grid.boundary_node_count() {
            return Err(GridError::TraceLength {
                expected: grid.boundary_node_count(),
                got: psi_trace.len(),
            });
        }
        for ((i, j, _), v) in grid.boundary_nodes().into_iter().zip(&psi_trace) {
            if !v.is_finite() {
                return Err(GridError::NonFiniteTrace {
                    rho: grid.rho(i),
                    z: grid.z(j),
                });
            }
        }
        Ok(Self { psi_trace, anchor })
    }

    pub fn psi_trace(&self) -> &[f64] {
        &self.psi_trace
    }

    pub fn anchor(&self) -> &Anchor {
        &self.anchor
    }

    pub fn with_anchor(mut self, anchor: Anchor) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn trace_min(&self) -> f64 {
        self.psi_trace.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn trace_max(&self) -> f64 {
        self.psi_trace
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn trace_mean(&self) -> f64 {
        self.psi_trace.iter().sum::<f64>() / self.psi_trace.len() as f64
    }

    /// Full-grid field carrying the trace on boundary nodes and `fill` inside.
    pub fn to_field(&self, grid: &MeridianGrid, fill: f64) -> ScalarField {
        let mut values = vec![fill; grid.len()];
        for ((i, j, _), v) in grid.boundary_nodes().into_iter().zip(&self.psi_trace) {
            values[grid.index(i, j)] = *v;
        }
        ScalarField::from_raw(*grid, values, "psi")
    }

    /// Largest jump in the trace between consecutive boundary nodes, relative
    /// to the trace range. Large values flag traces that are not Hölder
    /// continuous at the discrete level (e.g. mismatched corners).
    pub fn max_relative_jump(&self) -> f64 {
        let n = self.psi_trace.len();
        let range = (self.trace_max() - self.trace_min()).max(f64::MIN_POSITIVE);
        (0..n)
            .map(|k| (self.psi_trace[(k + 1) % n] - self.psi_trace[k]).abs())
            .fold(0.0, f64::max)
            / range
    }
}

/// Samples `trace(rho, z)` at every boundary node.
pub fn sample_boundary(
    grid: &MeridianGrid,
    trace: impl Fn(f64, f64) -> f64,
    anchor: Anchor,
) -> Result<BoundaryData, GridError> {
    let values = grid
        .boundary_nodes()
        .into_iter()
        .map(|(i, j, _)| {
            let (rho, z) = (grid.rho(i), grid.z(j));
            let v = trace(rho, z);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(GridError::NonFiniteTrace { rho, z })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    BoundaryData::new(grid, values, anchor)
}

/// Piecewise-linear samples of the trace along one edge, keyed by the edge
/// coordinate (ρ for bottom/top, z for left/right).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTable {
    points: Vec<(f64, f64)>,
}

impl EdgeTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self, GridError> {
        if points.is_empty() {
            return Err(GridError::InvalidTable("empty edge table".into()));
        }
        if points.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
            return Err(GridError::InvalidTable("non-finite entry".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(GridError::InvalidTable("repeated abscissa".into()));
        }
        Ok(Self { points })
    }

    /// Linear interpolation; constant extrapolation past either end.
    pub fn eval(&self, s: f64) -> f64 {
        let p = &self.points;
        if s <= p[0].0 {
            return p[0].1;
        }
        if s >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let k = p.partition_point(|q| q.0 <= s);
        let (s0, v0) = p[k - 1];
        let (s1, v1) = p[k];
        v0 + (v1 - v0) * (s - s0) / (s1 - s0)
    }
}

/// Named catalog of boundary traces.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryTrace {
    Constant {
        value: f64,
    },
    /// `slope * z + offset`
    LinearZ {
        slope: f64,
        offset: f64,
    },
    /// Curzon potential `-mass / sqrt(rho^2 + z^2)`.
    Curzon {
        mass: f64,
    },
    /// Dipole potential `moment * z / (rho^2 + z^2)^{3/2}`, odd in z.
    Dipole {
        moment: f64,
    },
    /// `k1 * ln(rho) + k2`; annular grids only.
    LogRadial {
        k1: f64,
        k2: f64,
    },
    Table {
        bottom: EdgeTable,
        right: EdgeTable,
        top: EdgeTable,
        left: EdgeTable,
    },
}

impl BoundaryTrace {
    /// Value at a point on the given edge.
    pub fn value(&self, edge: Edge, rho: f64, z: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::LinearZ { slope, offset } => slope * z + offset,
            Self::Curzon { mass } => -mass / rho.hypot(z),
            Self::Dipole { moment } => moment * z / rho.hypot(z).powi(3),
            Self::LogRadial { k1, k2 } => k1 * rho.ln() + k2,
            Self::Table {
                bottom,
                right,
                top,
                left,
            } => match edge {
                Edge::Bottom => bottom.eval(rho),
                Edge::Top => top.eval(rho),
                Edge::Right => right.eval(z),
                Edge::Left => left.eval(z),
            },
        }
    }

    /// Closed form inside the domain where one exists (used as an oracle).
    pub fn closed_form(&self, rho: f64, z: f64) -> Option<f64> {
        match self {
            Self::Table { .. } => None,
            _ => Some(self.value(Edge::Bottom, rho, z)),
        }
    }

    pub fn sample(&self, grid: &MeridianGrid, anchor: Anchor) -> Result<BoundaryData, GridError> {
        if matches!(self, Self::LogRadial { .. }) && grid.axis_touching() {
            return Err(GridError::SingularOnAxis { kind: "log_radial" });
        }
        let values = grid
            .boundary_nodes()
            .into_iter()
            .map(|(i, j, edge)| {
                let (rho, z) = (grid.rho(i), grid.z(j));
                let v = self.value(edge, rho, z);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(GridError::NonFiniteTrace { rho, z })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        BoundaryData::new(grid, values, anchor)
    }
}
