use std::sync::Arc;

use proptest::prelude::*;

use mgchain::eigensolve::{global_ground, lowest_levels, Method, SolverOptions};
use mgchain::hamiltonian::{build_hamiltonian, Boundary, ChainSpec};
use mgchain::hilbert::Sector;
use mgchain::observables::region_polarization;
use mgchain::states::PureState;

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Open), Just(Boundary::Periodic)]
}

/// `(N, N', 2L)` with a valid sector for `N`.
fn chain_shape(max_n: usize) -> impl Strategy<Value = (usize, usize, i32)> {
    (3..=max_n).prop_flat_map(|n| (Just(n), 0..=n, 0..=n).prop_map(|(n, np, k)| (n, np, 2 * k as i32 - n as i32)))
}

fn levels(spec: &ChainSpec, two_l: i32, k: usize, method: Method) -> Vec<f64> {
    let sector = Arc::new(Sector::new(spec.n_sites, two_l).unwrap());
    let op = build_hamiltonian(spec, sector).unwrap();
    let opts = SolverOptions { method, ..SolverOptions::default() };
    lowest_levels(&op, k, &opts).unwrap().energies().to_vec()
}

fn all_sectors(n: usize) -> Vec<i32> {
    (0..=n as i32).map(|k| 2 * k - n as i32).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_field_spectrum_is_flip_symmetric(
        (n, _np, two_l) in chain_shape(10), b in boundary(), j2 in 0.0f64..1.0,
    ) {
        let spec = ChainSpec::new(n, j2, b).unwrap();
        let up = levels(&spec, two_l, 4, Method::Dense);
        let down = levels(&spec, -two_l, 4, Method::Dense);
        for (a, c) in up.iter().zip(&down) {
            prop_assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn reversing_field_and_sector_preserves_spectrum(
        (n, np, two_l) in chain_shape(10), b in boundary(), j2 in 0.0f64..1.0, h in -3.0f64..3.0,
    ) {
        let plus = ChainSpec::new(n, j2, b).unwrap().with_field(h, np).unwrap();
        let minus = plus.with_field(-h, np).unwrap();
        let a = levels(&plus, two_l, 3, Method::Dense);
        let c = levels(&minus, -two_l, 3, Method::Dense);
        for (x, y) in a.iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_energy_is_concave_in_field(
        n in 4usize..=10, np in 1usize..=4, b in boundary(), j2 in 0.0f64..1.0,
        h0 in -3.0f64..3.0, dh in 0.01f64..2.0,
    ) {
        let np = np.min(n);
        let spec = ChainSpec::new(n, j2, b).unwrap();
        let sectors = all_sectors(n);
        let e = |h: f64| {
            global_ground(&spec.with_field(h, np).unwrap(), &sectors, 1, &SolverOptions::default()).unwrap().energy()
        };
        let (lo, mid, hi) = (e(h0 - dh), e(h0), e(h0 + dh));
        prop_assert!(mid >= 0.5 * (lo + hi) - 1e-10);
    }

    #[test]
    fn lanczos_agrees_with_dense(
        (n, np, two_l) in chain_shape(12), b in boundary(), j2 in 0.0f64..1.0, h in -3.0f64..3.0,
    ) {
        let spec = ChainSpec::new(n, j2, b).unwrap().with_field(h, np).unwrap();
        let dense = levels(&spec, two_l, 3, Method::Dense);
        let lanczos = levels(&spec, two_l, 3, Method::Lanczos);
        prop_assert_eq!(dense.len(), lanczos.len());
        for (x, y) in dense.iter().zip(&lanczos) {
            prop_assert!((x - y).abs() < 1e-9, "dense {x} lanczos {y}");
        }
    }

    #[test]
    fn site_polarizations_sum_to_sector_value(
        (n, np, two_l) in chain_shape(10), b in boundary(), h in -3.0f64..3.0,
    ) {
        let spec = ChainSpec::majumdar_ghosh(n, b).unwrap().with_field(h, np).unwrap();
        let sector = Arc::new(Sector::new(n, two_l).unwrap());
        let op = build_hamiltonian(&spec, sector.clone()).unwrap();
        let eig = lowest_levels(&op, 1, &SolverOptions::default()).unwrap();
        let psi = PureState::from_real(sector, eig.vector(0)).unwrap();
        let inside: Vec<usize> = (0..np).collect();
        let outside: Vec<usize> = (np..n).collect();
        let total = region_polarization(&psi, &inside).unwrap() + region_polarization(&psi, &outside).unwrap();
        prop_assert!((total - two_l as f64 / 2.0).abs() < 1e-10);
    }
}
