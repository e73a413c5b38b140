//! Property tests over seeded random inputs: structural invariants that must
//! hold for every strategy, state, or bitstring, not just the worked
//! examples.

use moe_core::bits;
use moe_core::games::{self, OPTIMAL_WIN};
use moe_core::matrix::{sample, trace_distance};
use moe_core::protocols::prg;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn winning_probability_stays_in_range_and_bias_is_affine(seed in 0u64..10_000) {
        let g = games::make_tfkw();
        let mut rng = sample::rng(seed);
        let s = games::sampler::random_povm_strategy(&g, 2, 2, &mut rng);
        let w = games::winning_probability(&g, &s).unwrap();
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&w));
        let b = games::bias(&g, &s).unwrap();
        prop_assert!((b - (4.0 * w - 2.0)).abs() < 1e-9);
        prop_assert!((-2.0 - 1e-9..=2.0 + 1e-9).contains(&b));
    }

    #[test]
    fn projective_strategies_never_beat_the_optimum(seed in 0u64..10_000) {
        let g = games::make_tfkw();
        let mut rng = sample::rng(seed);
        let s = games::sampler::random_pure_strategy(&g, 2, 2, &mut rng);
        let w = games::winning_probability_pure(&g, &s).unwrap();
        prop_assert!(w <= OPTIMAL_WIN + 1e-9);
    }

    #[test]
    fn trace_distance_metric_axioms(seed in 0u64..10_000) {
        let mut rng = sample::rng(seed);
        let a = sample::random_density(3, &mut rng);
        let b = sample::random_density(3, &mut rng);
        let c = sample::random_density(3, &mut rng);
        let dab = trace_distance(&a, &b).unwrap();
        let dba = trace_distance(&b, &a).unwrap();
        let dac = trace_distance(&a, &c).unwrap();
        let dcb = trace_distance(&c, &b).unwrap();
        prop_assert!((dab - dba).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-10).contains(&dab));
        prop_assert!(dab <= dac + dcb + 2e-9);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-10);
    }

    #[test]
    fn tensor_is_associative(seed in 0u64..10_000) {
        let mut rng = sample::rng(seed);
        let a = sample::random_hermitian(2, &mut rng);
        let b = sample::random_hermitian(3, &mut rng);
        let c = sample::random_hermitian(2, &mut rng);
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert!(left.sub(&right).max_abs() < 1e-12);
    }

    #[test]
    fn subset_rank_round_trip(seed in 0u64..10_000) {
        let mut rng = sample::rng(seed);
        let s = prg::uniform_subset(12, 5, &mut rng);
        let rank = prg::rank_subset(&s, 12);
        prop_assert_eq!(prg::unrank_subset(&rank, 12, 5), s);
    }

    #[test]
    fn expander_round_determinism_and_bit_encoding(seed_bits in proptest::collection::vec(0u8..2, 8..48)) {
        let out1 = prg::toy_prg(&seed_bits, 128).unwrap();
        let out2 = prg::toy_prg(&seed_bits, 128).unwrap();
        prop_assert_eq!(&out1, &out2);
        let as_string = bits::to_string(&out1);
        prop_assert_eq!(bits::from_string(&as_string).unwrap(), out1);
    }
}
