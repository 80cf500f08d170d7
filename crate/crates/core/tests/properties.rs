use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmcube::control_variates::{apply_controls, beta_qmc, ordered_spectra};
use qmcube::ledger::WavenumberMap;
use qmcube::{error_bound, optimal_estimate, sup_tolerance, tolerance_value, CoefficientLedger, ConeParams, Family, Tolerance};

fn tolerance() -> impl Strategy<Value = Tolerance> {
    (prop_oneof![Just(0.0), 1e-4..1.0f64], prop_oneof![Just(0.0), 1e-4..0.9f64])
        .prop_filter("not both zero", |(a, r)| *a > 0.0 || *r > 0.0)
        .prop_map(|(a, r)| Tolerance::new(a, r).unwrap())
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-10.0..10.0f64, 0.0..5.0f64).prop_map(|(lo, w)| (lo, lo + w))
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Digital), Just(Family::Lattice)]
}

fn noisy_values(seed: u64, m: u32) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..1usize << m).map(|i| (i as f64 * 0.37).sin() + 0.1 * rng.random::<f64>()).collect()
}

fn bound(family: Family, values: Vec<f64>) -> (f64, f64) {
    let cone = ConeParams::default();
    let ledger = CoefficientLedger::from_values(family, vec![values]).unwrap().with_adaptive_order(None, cone.r).unwrap();
    let e = error_bound(&ledger, &cone).unwrap()[0];
    (e.mu_hat, e.err)
}

proptest! {
    #[test]
    fn estimate_lies_in_interval((lo, hi) in interval(), tol in tolerance()) {
        let v = optimal_estimate(lo, hi, &tol);
        prop_assert!(lo <= v && v <= hi, "{lo} {v} {hi}");
    }

    #[test]
    fn sup_tolerance_is_attained_at_endpoints((lo, hi) in interval(), tol in tolerance()) {
        let v = optimal_estimate(lo, hi, &tol);
        let s = sup_tolerance(lo, hi, &tol);
        let ends = tolerance_value(lo, v, &tol).max(tolerance_value(hi, v, &tol));
        prop_assert!((ends - s).abs() <= 1e-9 * s.max(1.0), "{ends} vs {s}");
        for k in 0..=20 {
            let mu = lo + (hi - lo) * k as f64 / 20.0;
            prop_assert!(tolerance_value(mu, v, &tol) <= s * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn no_candidate_beats_the_estimate((lo, hi) in interval(), tol in tolerance(), t in 0.0..1.0f64) {
        let s = sup_tolerance(lo, hi, &tol);
        let c = lo + t * (hi - lo);
        let worst = tolerance_value(lo, c, &tol).max(tolerance_value(hi, c, &tol));
        prop_assert!(worst >= s - 1e-9 * s.max(1.0), "{worst} < {s}");
    }

    #[test]
    fn shrinking_never_hurts((lo, hi) in interval(), tol in tolerance(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let (lo2, hi2) = (lo + a * (hi - lo), lo + b * (hi - lo));
        prop_assert!(sup_tolerance(lo2, hi2, &tol) <= sup_tolerance(lo, hi, &tol) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn tolerance_value_is_zero_on_the_diagonal(v in -100.0..100.0f64, tol in tolerance()) {
        prop_assert_eq!(tolerance_value(v, v, &tol), 0.0);
    }

    #[test]
    fn error_bound_scales_with_power_of_two(seed in any::<u64>(), k in -8i32..8, neg in any::<bool>(), fam in family()) {
        let c = if neg { -2f64.powi(k) } else { 2f64.powi(k) };
        let values = noisy_values(seed, 10);
        let (mu, err) = bound(fam, values.clone());
        let (mu_c, err_c) = bound(fam, values.iter().map(|v| c * v).collect());
        prop_assert!((err_c - c.abs() * err).abs() <= 1e-12 * err_c.abs().max(1e-300));
        prop_assert!((mu_c - c * mu).abs() <= 1e-12 * c.abs() * mu.abs().max(1.0));
    }

    #[test]
    fn error_bound_ignores_constant_shift(seed in any::<u64>(), shift in -4.0..4.0f64, fam in family()) {
        let values = noisy_values(seed, 10);
        let (mu, err) = bound(fam, values.clone());
        let (mu_s, err_s) = bound(fam, values.iter().map(|v| v + shift).collect());
        prop_assert!((err_s - err).abs() <= 1e-9 * err);
        prop_assert!((mu_s - mu - shift).abs() <= 1e-12);
    }

    #[test]
    fn exact_control_removes_all_variation(seed in any::<u64>(), a in -3.0..3.0f64, b in 0.1..3.0f64, fam in family()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1usize << 10;
        let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let f: Vec<f64> = g.iter().map(|x| a + b * x).collect();
        let values = vec![f, g];
        let (fs, gs) = ordered_spectra(&values, fam).unwrap();
        let fit = beta_qmc(&fs, &gs, 10, 4).unwrap();
        prop_assert!((fit.beta[0] - b).abs() <= 1e-9 * b);
        let h = apply_controls(&values, &fit.beta, &[0.5]);
        let spread = h.iter().fold(0.0f64, |m, v| m.max((v - (a + 0.5 * b)).abs()));
        prop_assert!(spread <= 1e-9, "{spread}");
    }

    #[test]
    fn wavenumber_maps_are_permutations(seed in any::<u64>(), m in 1u32..10, depth in 1u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let small: Vec<f64> = (0..1usize << m).map(|_| rng.random::<f64>()).collect();
        let large: Vec<f64> = (0..2usize << m).map(|_| rng.random::<f64>()).collect();
        let a = WavenumberMap::sorted(&small).unwrap();
        let b = a.extended(&large, depth).unwrap();
        for map in [&a, &b] {
            let mut seen = map.as_slice().to_vec();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..map.len()).collect::<Vec<_>>());
            prop_assert_eq!(map.as_slice()[0], 0);
        }
    }
}
