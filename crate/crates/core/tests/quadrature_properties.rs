use proptest::prelude::*;
use weyl_core::grid::{Anchor, MeridianGrid, ScalarField};
use weyl_core::quadrature::{
    enclosed_circulation, integrate_gamma, integrate_gamma_z_first, path_difference, GradientFields,
};

fn random_fields(grid: MeridianGrid, f: Vec<f64>, g: Vec<f64>) -> GradientFields {
    GradientFields::new(
        ScalarField::new(grid, f, "F").unwrap(),
        ScalarField::new(grid, g, "G").unwrap(),
    )
}

fn grid_and_fields() -> impl Strategy<Value = (MeridianGrid, GradientFields, usize, usize)> {
    (3usize..10, 3usize..10, any::<bool>()).prop_flat_map(|(nr, nz, axis)| {
        let g = MeridianGrid::new(if axis { 0.0 } else { 0.7 }, 1.9, -0.4, 0.8, nr, nz).unwrap();
        let n = g.len();
        (
            Just(g),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
            0..nr,
            0..nz,
        )
            .prop_map(|(g, f, gg, i, j)| (g, random_fields(g, f, gg), i, j))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_difference_is_enclosed_circulation((g, fields, i, j) in grid_and_fields(), g0 in -1.0f64..1.0) {
        let a = Anchor::at_node(&g, i, j, g0);
        let lhs = path_difference(&fields, &a);
        let rhs = enclosed_circulation(&fields, &a);
        prop_assert!(lhs.sup_diff(&rhs) < 1e-12);
    }

    #[test]
    fn anchor_value_is_kept((g, fields, i, j) in grid_and_fields(), g0 in -5.0f64..5.0) {
        let a = Anchor::at_node(&g, i, j, g0);
        prop_assert_eq!(integrate_gamma(&fields, &a).at(i, j), g0);
        prop_assert_eq!(integrate_gamma_z_first(&fields, &a).at(i, j), g0);
    }

    #[test]
    fn gauge_shift_moves_gamma_rigidly((g, fields, i, j) in grid_and_fields(), g0 in -1.0f64..1.0, c in -3.0f64..3.0) {
        let a = Anchor::at_node(&g, i, j, g0);
        let base = integrate_gamma(&fields, &a);
        let shifted = integrate_gamma(&fields, &a.with_gamma(g0 + c));
        for (x, y) in base.values().iter().zip(shifted.values()) {
            prop_assert!((y - x - c).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_gradients_of_quadratics(coef in prop::array::uniform6(-1.0f64..1.0), n in 3usize..12) {
        // phi = c0 + c1 r + c2 z + c3 r^2 + c4 r z + c5 z^2; trapezoids are exact
        // for its linear gradient.
        let phi = |r: f64, z: f64| coef[0] + coef[1] * r + coef[2] * z + coef[3] * r * r + coef[4] * r * z + coef[5] * z * z;
        let g = MeridianGrid::new(0.3, 1.3, -0.5, 0.5, n, n + 1).unwrap();
        let fields = GradientFields::new(
            ScalarField::from_fn(g, "F", |r, z| coef[1] + 2.0 * coef[3] * r + coef[4] * z).unwrap(),
            ScalarField::from_fn(g, "G", |r, z| coef[2] + coef[4] * r + 2.0 * coef[5] * z).unwrap(),
        );
        let a = Anchor::at_node(&g, n / 2, 0, phi(g.rho(n / 2), g.z(0)));
        let gamma = integrate_gamma(&fields, &a);
        for k in 0..g.len() {
            let (r, z) = g.coords(k);
            prop_assert!((gamma.values()[k] - phi(r, z)).abs() < 1e-12);
        }
    }
}
