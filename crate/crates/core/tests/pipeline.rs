use proptest::prelude::*;
use weyl_core::elliptic::{operator_residual, SolverConfig};
use weyl_core::grid::{Anchor, BoundaryTrace, MeridianGrid, ScalarField};
use weyl_core::pipeline::solve_vacuum;
use weyl_core::quadrature::{check_analyticity, SourcePair};
use weyl_core::verify::{vacuum_residuals, WeylSolution, PHI_PHI_LABEL, TT_LABEL};

fn curzon_gamma(r: f64, z: f64) -> f64 {
    let s = r * r + z * z;
    -r * r / (2.0 * s * s)
}

fn curzon_run(n: usize) -> weyl_core::pipeline::VacuumSolve {
    let g = MeridianGrid::new(1.0, 2.0, 0.5, 1.5, n, n).unwrap();
    let anchor = Anchor::at_node(&g, n - 1, n - 1, curzon_gamma(2.0, 1.5));
    let b = BoundaryTrace::Curzon { mass: 1.0 }
        .sample(&g, anchor)
        .unwrap();
    solve_vacuum(&g, &b, &SourcePair::Zero, &SolverConfig::default(), None).unwrap()
}

#[test]
fn curzon_end_to_end() {
    let run = curzon_run(33);
    assert!(run.all_pass(), "{:?}", run.residuals.report);
    let g = *run.solution.grid();
    let gerr = (0..g.len())
        .map(|k| {
            let (r, z) = g.coords(k);
            (run.solution.gamma().values()[k] - curzon_gamma(r, z)).abs()
        })
        .fold(0.0, f64::max);
    assert!(gerr < 1e-3, "{gerr}");
}

#[test]
fn curzon_residuals_are_second_order() {
    let (a, b) = (curzon_run(33), curzon_run(65));
    for label in [TT_LABEL, PHI_PHI_LABEL] {
        let ratio =
            a.residuals.report.get(label).unwrap().sup / b.residuals.report.get(label).unwrap().sup;
        assert!(ratio > 3.0, "{label}: {ratio}");
    }
}

#[test]
fn squared_w_sources() {
    let g = MeridianGrid::new(1.0, 2.0, -0.5, 0.5, 33, 33).unwrap();
    let sources = SourcePair::Polynomial {
        coefficients: vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
    };
    let (r, z) = (1.3, 0.2);
    let (gs, hs) = sources.eval(r, z);
    assert!((gs - 2.0 * z).abs() < 1e-15 && (hs - (r - z * z / r)).abs() < 1e-15);
    assert!(check_analyticity(&sources, &g, None).unwrap().certified);
    let b = BoundaryTrace::Curzon { mass: 1.0 }
        .sample(&g, Anchor::at_node(&g, 0, 0, 0.0))
        .unwrap();
    let run = solve_vacuum(&g, &b, &sources, &SolverConfig::default(), None).unwrap();
    assert!(run.all_pass(), "{:?}", run.residuals.report);
}

#[test]
fn non_analytic_sources_are_flagged() {
    let g = MeridianGrid::new(1.0, 2.0, -0.5, 0.5, 17, 17).unwrap();
    let sources = SourcePair::Affine {
        g: [0.0, 1.0, 0.0],
        h: [0.0, 0.0, 0.0],
    };
    let b = BoundaryTrace::Constant { value: 0.0 }
        .sample(&g, Anchor::at_node(&g, 0, 0, 0.0))
        .unwrap();
    let run = solve_vacuum(&g, &b, &sources, &SolverConfig::default(), None).unwrap();
    assert!(!run.analyticity.certified);
    assert!(!run.all_pass());
}

#[test]
fn linear_trace_is_reproduced() {
    let a = 0.5;
    let g = MeridianGrid::new(1.0, 2.0, 0.5, 1.5, 33, 33).unwrap();
    let (i0, j0) = (16, 16);
    let g0 = 0.25;
    let b = BoundaryTrace::LinearZ {
        slope: a,
        offset: 0.0,
    }
    .sample(&g, Anchor::at_node(&g, i0, j0, g0))
    .unwrap();
    let run = solve_vacuum(&g, &b, &SourcePair::Zero, &SolverConfig::default(), None).unwrap();
    let rho0 = g.rho(i0);
    for k in 0..g.len() {
        let (r, z) = g.coords(k);
        assert!((run.solution.psi().values()[k] - a * z).abs() < 1e-9);
        let expect = g0 - a * a * (r * r - rho0 * rho0) / 2.0;
        assert!((run.solution.gamma().values()[k] - expect).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tt_minus_phi_phi_is_the_laplacian(c in prop::array::uniform4(-1.0f64..1.0), n in 5usize..10) {
        let g = MeridianGrid::new(0.5, 1.5, 0.0, 1.0, n, n + 1).unwrap();
        let psi = ScalarField::from_fn(g, "psi", |r, z| c[0] * r * z + c[1] * (r + z).sin()).unwrap();
        let gamma = ScalarField::from_fn(g, "gamma", |r, z| c[2] * r * r + c[3] * z.cos()).unwrap();
        let lap = operator_residual(&psi, &g);
        let res = vacuum_residuals(&WeylSolution::new(psi, gamma).unwrap(), 1.0).unwrap();
        for (i, j) in g.interior_nodes() {
            let d = res.tt.at(i, j) - res.phi_phi.at(i, j) + 2.0 * lap.at(i, j);
            prop_assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn residuals_ignore_gauge_constant(c in -2.0f64..2.0, n in 5usize..10) {
        let g = MeridianGrid::new(0.5, 1.5, 0.0, 1.0, n, n).unwrap();
        let psi = ScalarField::from_fn(g, "psi", |r, z| (r * z).sin()).unwrap();
        let gamma = |s: f64| ScalarField::from_fn(g, "gamma", move |r, z| r * z * z + s).unwrap();
        let a = vacuum_residuals(&WeylSolution::new(psi.clone(), gamma(0.0)).unwrap(), 1.0).unwrap();
        let b = vacuum_residuals(&WeylSolution::new(psi, gamma(c)).unwrap(), 1.0).unwrap();
        for (x, y) in a.report.equations.iter().zip(&b.report.equations) {
            prop_assert!((x.sup - y.sup).abs() < 1e-9 * (1.0 + x.sup));
        }
    }
}
