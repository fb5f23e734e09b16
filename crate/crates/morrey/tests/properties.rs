//! Property tests for the structural laws the norms and operators must
//! satisfy on arbitrary data.

use proptest::prelude::*;

use morrey::grid::{window_average, window_average_direct, Boundary, CubeMode, GridFunction, Prefix};
use morrey::maxops::{hl_maximal, MaximalMode};
use morrey::norms::{morrey_norm, weak_morrey_norm};
use morrey::shapes::ShapeFunction;

fn grid_1d(values: Vec<f64>) -> GridFunction {
    // 2^4 cells on [0, 2): L = 1, K = 3.
    GridFunction::from_values(1, 1, 3, Boundary::Zero, values).unwrap()
}

fn values_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_equals_direct_on_every_window(values in values_strategy()) {
        let f = grid_1d(values);
        let pref = Prefix::new(&f, |v| v.abs());
        for w in f.enumerate_windows() {
            let fast = window_average(&f, &pref, &w).unwrap();
            let slow = window_average_direct(&f, &w);
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0));
        }
    }

    #[test]
    fn norm_homogeneity(values in values_strategy(), c in -4.0f64..4.0) {
        let f = grid_1d(values);
        let phi = ShapeFunction::power(0.5);
        let base = morrey_norm(&f, 1.0, &phi, CubeMode::Dyadic).unwrap().value;
        let scaled = morrey_norm(&f.scale(c), 1.0, &phi, CubeMode::Dyadic).unwrap().value;
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn norm_lattice_property(values in values_strategy(), bump in 0.0f64..3.0) {
        let f = grid_1d(values).map(|v| v.abs());
        let g = f.map(|v| v + bump);
        let phi = ShapeFunction::power(0.3);
        for p in [0.5, 1.0, 2.0] {
            let nf = morrey_norm(&f, p, &phi, CubeMode::Dyadic).unwrap().value;
            let ng = morrey_norm(&g, p, &phi, CubeMode::Dyadic).unwrap().value;
            prop_assert!(nf <= ng + 1e-12);
        }
    }

    #[test]
    fn p_triangle_inequality(a in values_strategy(), b in values_strategy()) {
        let f = grid_1d(a);
        let g = grid_1d(b);
        let phi = ShapeFunction::power(0.4);
        for p in [0.5, 0.75, 1.0] {
            let nf = morrey_norm(&f, p, &phi, CubeMode::Dyadic).unwrap().value;
            let ng = morrey_norm(&g, p, &phi, CubeMode::Dyadic).unwrap().value;
            let nfg = morrey_norm(&f.add(&g).unwrap(), p, &phi, CubeMode::Dyadic).unwrap().value;
            prop_assert!(nfg.powf(p) <= nf.powf(p) + ng.powf(p) + 1e-10);
        }
    }

    #[test]
    fn weak_norm_below_strong(values in values_strategy()) {
        let f = grid_1d(values);
        let phi = ShapeFunction::power(0.5);
        let weak = weak_morrey_norm(&f, 1.0, &phi, CubeMode::Dyadic).unwrap().value;
        let strong = morrey_norm(&f, 1.0, &phi, CubeMode::Dyadic).unwrap().value;
        prop_assert!(weak <= strong * (1.0 + 1e-12));
    }

    #[test]
    fn maximal_dominates_and_is_sublinear(a in values_strategy(), b in values_strategy()) {
        let f = grid_1d(a);
        let g = grid_1d(b);
        let mf = hl_maximal(&f, MaximalMode::WindowsExact);
        let mg = hl_maximal(&g, MaximalMode::WindowsExact);
        let mfg = hl_maximal(&f.add(&g).unwrap(), MaximalMode::WindowsExact);
        for i in 0..f.len() {
            prop_assert!(mf.values()[i] >= f.values()[i].abs() - 1e-15);
            prop_assert!(mfg.values()[i] <= mf.values()[i] + mg.values()[i] + 1e-12);
        }
    }

    #[test]
    fn grid_function_text_round_trip(values in values_strategy()) {
        let f = grid_1d(values);
        let back = GridFunction::from_text(&f.to_text()).unwrap();
        for (x, y) in f.values().iter().zip(back.values()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
