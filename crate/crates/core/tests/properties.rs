use bds::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn levels(j: f64, u: f64, gamma: f64) -> EnergyLevels {
    energy_levels(&DimerParams::new(1.0, j, u, gamma).unwrap()).unwrap()
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn resolvent_identity(
        e in -2.0..3.0f64, hw in 0.01..1.0f64,
        x1 in -3.0..4.0f64, y1 in -1.0..1.0f64,
        x2 in -3.0..4.0f64, y2 in -1.0..1.0f64,
    ) {
        let level = ComplexEnergy::new(e, hw).unwrap();
        let (z1, z2) = (Complex64::new(x1, y1), Complex64::new(x2, y2));
        let (g1, g2) = match (resolvent(level, z1), resolvent(level, z2)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Ok(()),
        };
        prop_assume!(g1.norm() < 1e6 && g2.norm() < 1e6);
        prop_assert!(close(g1 - g2, (z2 - z1) * g1 * g2, 1e-9));
    }

    #[test]
    fn levels_scale_with_energy_unit(
        c in 0.1..10.0f64, j in -1.0..1.0f64, u in -1.0..1.0f64, gamma in 0.05..1.0f64,
    ) {
        let a = levels(j, u, gamma);
        let b = energy_levels(&DimerParams::new(c, c * j, c * u, c * gamma).unwrap()).unwrap();
        for (x, y) in [(a.e_b, b.e_b), (a.e_d, b.e_d), (a.e_c, b.e_c), (a.gamma_c, b.gamma_c)] {
            prop_assert!((c * x - y).abs() <= 1e-12 * y.abs().max(c));
        }
        prop_assert_eq!(classify(&DimerParams::new(1.0, j, u, gamma).unwrap()),
            classify(&DimerParams::new(c, c * j, c * u, c * gamma).unwrap()));
    }

    #[test]
    fn cascade_intensity_is_exchange_symmetric(
        j in -1.0..1.0f64, u in -1.0..1.0f64, gamma in 0.05..1.0f64,
        w1 in 0.0..4.0f64, w2 in 0.0..4.0f64,
    ) {
        let l = levels(j, u, gamma);
        let mu = Dipoles::default();
        prop_assert_eq!(cascade_intensity(&l, mu, w1, w2), cascade_intensity(&l, mu, w2, w1));
    }

    #[test]
    fn s2_pair_swaps_and_reciprocity(
        j in -1.0..1.0f64, u in -1.0..1.0f64, gamma in 0.05..1.0f64,
        w1 in 0.1..3.0f64, w2 in 0.1..3.0f64, w1p in 0.1..3.0f64,
    ) {
        let l = levels(j, u, gamma);
        let mu = Dipoles::default();
        let w2p = w1 + w2 - w1p;
        let s = s2_element(&l, mu, w1, w2, w1p, w2p).unwrap();
        prop_assert!(close(s, s2_element(&l, mu, w2, w1, w1p, w2p).unwrap(), 1e-12));
        prop_assert!(close(s, s2_element(&l, mu, w1, w2, w2p, w1p).unwrap(), 1e-12));
        let back = s2_element(&l, mu, w1p, w2p, w1, w2).unwrap();
        prop_assert!((s.norm() - back.norm()).abs() <= 1e-12 * s.norm());
    }

    #[test]
    fn s2_rejects_off_shell_pairs(w1 in 0.1..3.0f64, w2 in 0.1..3.0f64, w1p in 0.1..3.0f64, gap in 1e-6..1.0f64) {
        let l = levels(-0.5, 1.0, 0.1);
        let r = s2_element(&l, Dipoles::default(), w1, w2, w1p, w1 + w2 - w1p + gap);
        let is_violation = matches!(r, Err(ModelError::ConservationViolation { .. }));
        prop_assert!(is_violation);
    }

    #[test]
    fn lorentzian_product_is_pure(wb in 0.5..1.5f64, gamma in 0.1..1.0f64) {
        let l = levels(wb - 1.0, 0.3, gamma);
        let grid = FrequencyGrid::square(0.0, 3.0, 41).unwrap();
        let g = raman_grid(&l, Dipoles::default(), &grid, Normalization::Raw).unwrap();
        prop_assert!(schmidt_decompose(&g).unwrap().entropy < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_ignores_scale_and_transpose(
        j in -1.0..1.0f64, u in -1.0..1.0f64, gamma in 0.1..1.0f64, c in 1e-6..1e6f64,
    ) {
        let l = levels(j, u, gamma);
        let grid = FrequencyGrid::square(0.0, 3.0, 41).unwrap();
        let g = cascade_grid(&l, Dipoles::default(), &grid, Normalization::Raw).unwrap();
        let base = schmidt_decompose_matrix(&g.values).unwrap();
        let scaled = schmidt_decompose_matrix(&(&g.values * c)).unwrap();
        let transposed = schmidt_decompose_matrix(&g.values.transpose()).unwrap();
        prop_assert!((base.entropy - scaled.entropy).abs() < 1e-10);
        prop_assert!((base.entropy - transposed.entropy).abs() < 1e-10);
        for (a, b) in base.weights.iter().zip(&scaled.weights) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_locus_is_pure(j in -0.45..1.0f64, gamma in 0.3..1.0f64) {
        let p = DimerParams::new(1.0, j, 2.0 * j, gamma).unwrap();
        let grid = FrequencyGrid::square(0.0, 3.0, 61).unwrap();
        let e = entropy_of_params(&p, &grid, EntropySource::Cascade).unwrap();
        prop_assert!(e < 1e-6, "entropy {e} at j={j}");
    }

    #[test]
    fn unit_sum_normalization_does_not_change_entropy(j in -1.0..1.0f64, u in -1.0..1.0f64) {
        let l = levels(j, u, 0.6);
        let grid = FrequencyGrid::square(0.0, 3.0, 41).unwrap();
        let raw = cascade_grid(&l, Dipoles::default(), &grid, Normalization::Raw).unwrap();
        let unit = cascade_grid(&l, Dipoles::default(), &grid, Normalization::UnitSum).unwrap();
        prop_assert!((unit.integral() - 1.0).abs() < 1e-9);
        let d = schmidt_decompose(&raw).unwrap().entropy - schmidt_decompose(&unit).unwrap().entropy;
        prop_assert!(d.abs() < 1e-10);
    }

    #[test]
    fn random_nonnegative_matrix_weights_are_a_distribution(
        vals in proptest::collection::vec(0.0..1.0f64, 12 * 9),
    ) {
        prop_assume!(vals.iter().any(|&v| v > 0.0));
        let m = DMatrix::from_row_slice(12, 9, &vals);
        let s = schmidt_decompose_matrix(&m).unwrap();
        let total: f64 = s.weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(s.weights.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.entropy >= 0.0 && s.entropy <= (9f64).ln() + 1e-12);
    }
}
