//! Finite-difference derivatives on a [`MeridianGrid`].
//!
//! First derivatives are central in the interior. On boundary nodes the
//! one-sided formula is the central difference with a ghost value from quartic
//! extrapolation, `(-5 f0 + 11 f1 - 10 f2 + 5 f3 - f4) / 2h`. It is second
//! order and agrees with the central formula through the `h³` term (error
//! `h² f'''/6 + O(h⁴)`), so the error field of a derivative stays smooth up to
//! the boundary. γ is built by integrating such derivatives and is then
//! differenced twice, which would expose any `O(h³)` kink as an `O(h)` error.
//! Lines of four nodes use the cubic ghost `(-4 f0 + 7 f1 - 4 f2 + f3) / 2h`,
//! lines of three the standard three-point formula.
//!
//! On the axis (`rho == 0`) the ρ-derivative of an axisymmetric field is zero
//! by even symmetry.

use crate::grid::MeridianGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Rho,
    Z,
}

fn first_derivative(grid: &MeridianGrid, f: &[f64], dir: Dir) -> Vec<f64> {
    let (n, h) = match dir {
        Dir::Rho => (grid.n_rho(), grid.h_rho()),
        Dir::Z => (grid.n_z(), grid.h_z()),
    };
    let at = |line: usize, s: usize| -> f64 {
        match dir {
            Dir::Rho => f[grid.index(s, line)],
            Dir::Z => f[grid.index(line, s)],
        }
    };
    let lines = match dir {
        Dir::Rho => grid.n_z(),
        Dir::Z => grid.n_rho(),
    };
    let mut out = vec![0.0; grid.len()];
    let inv2h = 1.0 / (2.0 * h);
    for line in 0..lines {
        let idx = |s: usize| match dir {
            Dir::Rho => grid.index(s, line),
            Dir::Z => grid.index(line, s),
        };
        for s in 1..n - 1 {
            out[idx(s)] = (at(line, s + 1) - at(line, s - 1)) * inv2h;
        }
        // Written as differences from the end value so constants give exact zeros.
        let (f0, fl) = (at(line, 0), at(line, n - 1));
        let (lo, hi) = if n >= 5 {
            (
                (11.0 * (at(line, 1) - f0) - 10.0 * (at(line, 2) - f0) + 5.0 * (at(line, 3) - f0)
                    - (at(line, 4) - f0))
                    * inv2h,
                -(11.0 * (at(line, n - 2) - fl) - 10.0 * (at(line, n - 3) - fl)
                    + 5.0 * (at(line, n - 4) - fl)
                    - (at(line, n - 5) - fl))
                    * inv2h,
            )
        } else if n == 4 {
            (
                (7.0 * (at(line, 1) - f0) - 4.0 * (at(line, 2) - f0) + (at(line, 3) - f0)) * inv2h,
                -(7.0 * (at(line, n - 2) - fl) - 4.0 * (at(line, n - 3) - fl)
                    + (at(line, n - 4) - fl))
                    * inv2h,
            )
        } else {
            (
                (4.0 * (at(line, 1) - f0) - (at(line, 2) - f0)) * inv2h,
                -(4.0 * (at(line, n - 2) - fl) - (at(line, n - 3) - fl)) * inv2h,
            )
        };
        out[idx(0)] = if dir == Dir::Rho && grid.axis_touching() {
            0.0
        } else {
            lo
        };
        out[idx(n - 1)] = hi;
    }
    out
}

/// ∂f/∂ρ at every node.
pub fn d_rho(grid: &MeridianGrid, f: &[f64]) -> Vec<f64> {
    first_derivative(grid, f, Dir::Rho)
}

/// ∂f/∂z at every node.
pub fn d_z(grid: &MeridianGrid, f: &[f64]) -> Vec<f64> {
    first_derivative(grid, f, Dir::Z)
}

#[inline]
pub fn central_rho(grid: &MeridianGrid, f: &[f64], i: usize, j: usize) -> f64 {
    (f[grid.index(i + 1, j)] - f[grid.index(i - 1, j)]) / (2.0 * grid.h_rho())
}

#[inline]
pub fn central_z(grid: &MeridianGrid, f: &[f64], i: usize, j: usize) -> f64 {
    (f[grid.index(i, j + 1)] - f[grid.index(i, j - 1)]) / (2.0 * grid.h_z())
}

#[inline]
pub fn central_rho_rho(grid: &MeridianGrid, f: &[f64], i: usize, j: usize) -> f64 {
    let h = grid.h_rho();
    (f[grid.index(i + 1, j)] - 2.0 * f[grid.index(i, j)] + f[grid.index(i - 1, j)]) / (h * h)
}

#[inline]
pub fn central_z_z(grid: &MeridianGrid, f: &[f64], i: usize, j: usize) -> f64 {
    let h = grid.h_z();
    (f[grid.index(i, j + 1)] - 2.0 * f[grid.index(i, j)] + f[grid.index(i, j - 1)]) / (h * h)
}

/// Discrete `f_ρρ + f_ρ/ρ + f_zz` at an interior node (ρ > 0 there).
#[inline]
pub fn axisymmetric_laplacian(grid: &MeridianGrid, f: &[f64], i: usize, j: usize) -> f64 {
    central_rho_rho(grid, f, i, j)
        + central_rho(grid, f, i, j) / grid.rho(i)
        + central_z_z(grid, f, i, j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: &MeridianGrid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let (r, z) = grid.coords(k);
                f(r, z)
            })
            .collect()
    }

    #[test]
    fn quadratics_are_differentiated_exactly() {
        let g = MeridianGrid::new(0.5, 1.5, -1.0, 1.0, 9, 7).unwrap();
        let f = sample(&g, |r, z| 3.0 * r * r - 2.0 * r * z + z * z + 1.0);
        let fr = d_rho(&g, &f);
        let fz = d_z(&g, &f);
        for k in 0..g.len() {
            let (r, z) = g.coords(k);
            assert!((fr[k] - (6.0 * r - 2.0 * z)).abs() < 1e-12, "{k}");
            assert!((fz[k] - (-2.0 * r + 2.0 * z)).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn boundary_error_matches_central_leading_term() {
        // f = ρ³: every formula returns 3ρ² + h² exactly.
        for n in [4, 5, 11] {
            let g = MeridianGrid::new(1.0, 2.0, 0.0, 1.0, n, 3).unwrap();
            let f = sample(&g, |r, _| r * r * r);
            let fr = d_rho(&g, &f);
            let h = g.h_rho();
            for (k, d) in fr.iter().enumerate() {
                let (r, _) = g.coords(k);
                assert!((d - (3.0 * r * r + h * h)).abs() < 1e-12, "{n} {k}");
            }
        }
    }

    #[test]
    fn three_node_fallback() {
        let g = MeridianGrid::new(1.0, 2.0, 0.0, 1.0, 3, 3).unwrap();
        let f = sample(&g, |r, z| r * r + z);
        let fr = d_rho(&g, &f);
        let fz = d_z(&g, &f);
        for k in 0..g.len() {
            let (r, _) = g.coords(k);
            assert!((fr[k] - 2.0 * r).abs() < 1e-13);
            assert!((fz[k] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn axis_derivative_vanishes() {
        let g = MeridianGrid::new(0.0, 1.0, 0.0, 1.0, 5, 5).unwrap();
        let f = sample(&g, |r, z| r * r + z);
        let fr = d_rho(&g, &f);
        for j in 0..5 {
            assert_eq!(fr[g.index(0, j)], 0.0);
        }
    }

    #[test]
    fn laplacian_of_rho_squared() {
        let g = MeridianGrid::new(1.0, 2.0, 0.0, 1.0, 9, 9).unwrap();
        let f = sample(&g, |r, _| r * r);
        for (i, j) in g.interior_nodes() {
            assert!((axisymmetric_laplacian(&g, &f, i, j) - 4.0).abs() < 1e-10);
        }
    }
}
