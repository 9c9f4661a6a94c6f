use aqrm_core::scalar::{rat, rat_int};
use aqrm_core::spectrum::{
    crossing_scan, discover_symmetry, eigensolve, eigenvalues, joint_eigen_check, truncated_hamiltonian, NumericParams,
    ScanConfig,
};
use aqrm_core::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn catalog_lies_in_the_discovered_nullspace(g in 0.2f64..1.5, delta in 0.1f64..1.5, k in 0usize..5) {
        let (eps, degree) = [(0.0, 1), (0.5, 1), (-0.5, 1), (1.0, 2), (-1.0, 2)][k];
        let r = discover_symmetry(&NumericParams::new(g, delta, eps), degree, 30).unwrap();
        prop_assert!(r.nullspace_dimension >= 1);
        prop_assert!(r.catalog_deviation.unwrap() <= 1e-9, "{:?}", r.catalog_deviation);
    }

    #[test]
    fn solvers_agree_on_the_hamiltonian(g in 0.0f64..1.5, delta in 0.0f64..1.5, eps in -1.5f64..1.5) {
        let h = truncated_hamiltonian(&NumericParams::new(g, delta, eps), 30).matrix;
        let e = eigensolve(&h).unwrap();
        let v = eigenvalues(&h).unwrap();
        for (a, b) in e.values.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn scan_separates_special_biases() {
    let window = |eps| {
        let mut c = ScanConfig::new(eps, 0.7, 0.3, 0.9);
        c.steps = 120;
        c.n = 40;
        c.levels = 6;
        crossing_scan(&c).unwrap().min_gap().unwrap().refined_gap
    };
    let special = [0.0, 0.5, 1.0].map(window);
    let generic = [0.2, 0.45, 0.8].map(window);
    let worst_special = special.iter().copied().fold(0.0, f64::max);
    let best_generic = generic.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(worst_special * 1e3 < best_generic, "{:?} vs {:?}", special, generic);
}

#[test]
fn joint_sectors_partition_certified_levels() {
    for eps in [rat(1, 2), rat(-1, 2), rat_int(0)] {
        let r = joint_eigen_check(0.6, 0.9, &eps, 60, 10).unwrap();
        assert!(r.all_certified());
        let (pos, neg) = r.sectors();
        assert!(!pos.is_empty() && !neg.is_empty());
        assert_eq!(pos.len() + neg.len(), r.levels.len());
    }
}

#[test]
fn off_catalog_bias_is_a_catalog_miss() {
    assert!(matches!(joint_eigen_check(0.6, 0.9, &rat(1, 3), 30, 4), Err(Error::CatalogMiss { .. })));
}
