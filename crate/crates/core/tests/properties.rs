use std::f64::consts::LN_2;

use approx::assert_relative_eq;
use hopf_core::geometry::make_annulus;
use hopf_core::solver::solve_harmonic;
use hopf_core::{Grid, OrliczFunction, SolveOptions, Topology};
use proptest::prelude::*;

proptest! {
    #[test]
    fn young_inequality_for_powers(p in 1.3f64..6.0, a in 0.0f64..20.0, b in 0.0f64..5.0) {
        let of = OrliczFunction::power(p).unwrap();
        prop_assert!(of.young_gap(a, b).unwrap() >= -1e-10);
    }

    #[test]
    fn g_inverts_h(p in 1.1f64..6.0, t in 1e-3f64..50.0) {
        let of = OrliczFunction::power(p).unwrap();
        let back = of.g(of.h(t)).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn conjugate_exponent_round_trips(p in 1.1f64..6.0, t in 0.0f64..10.0) {
        let of = OrliczFunction::power(p).unwrap();
        let twice = of.conjugate().unwrap().conjugate().unwrap();
        prop_assert!((twice.f(t).unwrap() - of.f(t).unwrap()).abs() <= 1e-9 * of.f(t).unwrap().max(1.0));
    }
}

#[test]
fn quadrature_matches_power_closed_forms() {
    for p in [1.5, 2.0, 3.0, 4.5] {
        let exact = OrliczFunction::power(p).unwrap();
        let numeric = OrliczFunction::from_fn("t^(p-1)", move |t| t.powf(p - 1.0), 1e3).unwrap();
        for t in [0.01, 0.3, 1.0, 2.5, 7.0] {
            assert_relative_eq!(numeric.f(t).unwrap(), exact.f(t).unwrap(), max_relative = 1e-8, epsilon = 1e-12);
            assert_relative_eq!(numeric.f_star(t).unwrap(), exact.f_star(t).unwrap(), max_relative = 1e-6, epsilon = 1e-12);
        }
    }
}

#[test]
fn harmonic_annulus_error_decreases_with_resolution() {
    let err = |n: usize| {
        let g = Grid::square(-2.1, 2.1, n).unwrap();
        let topo = Topology::new(&make_annulus(1.0, 2.0, g).unwrap());
        let w = solve_harmonic(&topo, &SolveOptions::default()).unwrap().field;
        let grid = *w.grid();
        topo.cells().iter().map(|&c| (w.value(c) - (2.0 / grid.center_of(c).norm()).ln() / LN_2).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(65), err(129));
    assert!(fine < 0.5 * coarse, "{coarse:e} -> {fine:e}");
}
