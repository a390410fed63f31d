//! Randomized cross-implementation properties of the core library.

use proptest::prelude::*;
use rmdl_core::convolution::{
    composition_count, convolve_power_direct, convolve_power_fft, goldbach_coefficients, Method,
};
use rmdl_core::ensemble::{exact_distribution, sample_coefficient, symmetry_check, SeedSpec};
use rmdl_core::mangoldt::MangoldtTable;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// FFT power convolution matches the direct oracle on arbitrary
    /// nonnegative weight arrays, within the certified bound.
    #[test]
    fn fft_matches_direct_on_random_weights(
        weights in prop::collection::vec(0.0f64..10.0, 2..80),
        r in 1u32..5,
    ) {
        let n_max = (weights.len() - 1) as u64;
        let direct = convolve_power_direct(&weights, r, n_max).unwrap();
        let (fft, bound) = convolve_power_fft(&weights, r, n_max).unwrap();
        for (a, b) in direct.iter().zip(fft.iter()) {
            prop_assert!((a - b).abs() <= bound.max(1e-12));
        }
    }

    /// Pascal recurrence L_r(n) = L_{r-1}(n-1) + L_r(n-1) away from saturation.
    #[test]
    fn composition_count_pascal_recurrence(n in 2u64..500, r in 2u32..8) {
        let whole = composition_count(n, r);
        let first = composition_count(n - 1, r - 1);
        let rest = composition_count(n - 1, r);
        prop_assume!(!whole.saturated && !first.saturated && !rest.saturated);
        prop_assert_eq!(whole.count, first.count + rest.count);
    }

    /// Sign draws are a pure function of (seed, replicate, r, n, rank).
    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), rep in 0u64..8, n in 4u64..200) {
        let table = MangoldtTable::build(200).unwrap();
        let a = sample_coefficient(&table, 2, n, SeedSpec::new(seed, rep)).unwrap();
        let b = sample_coefficient(&table, 2, n, SeedSpec::new(seed, rep)).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Exhaustive sign enumeration always yields a symmetric law whose second
    /// moment is W_r(n).
    #[test]
    fn exact_law_symmetric_with_matching_second_moment(n in 3u64..24, r in 2u32..4) {
        let table = MangoldtTable::build(64).unwrap();
        let l = composition_count(n, r);
        prop_assume!(!l.saturated && l.count >= 1 && l.count <= 20);
        let dist = exact_distribution(&table, r, n).unwrap();
        prop_assert!(symmetry_check(&dist));
        let m2: f64 = dist
            .support
            .iter()
            .zip(dist.counts.iter())
            .map(|(v, c)| v * v * (*c as f64))
            .sum::<f64>()
            / 2f64.powi(dist.denominator_log2 as i32);
        let w = goldbach_coefficients(&table, r, n, Method::Direct).unwrap().w[n as usize];
        prop_assert!((m2 - w).abs() <= 1e-9 * w.max(1.0));
    }
}
