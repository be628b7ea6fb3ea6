//! Property tests over randomized states and disorder parameters.

use num_complex::Complex64;
use proptest::prelude::*;
use qwalk_core::disorder::{
    apply_jumps, gcd, partition_function, partition_function_bruteforce, sample_jump_set,
    DisorderMode, DisorderParams, JumpSampler,
};
use qwalk_core::stats::{position_variance, shannon_entropy, tsallis_entropy};
use qwalk_core::walk::{
    step_channel, step_vertex, to_channel_state, to_vertex_state, ChannelState,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_state(n: usize, raw: &[(f64, f64)]) -> ChannelState {
    let mut amps: Vec<Complex64> = raw
        .iter()
        .cycle()
        .take(n)
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    // avoid the all-zero corner case
    amps[0] += Complex64::new(0.5, 0.0);
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    ChannelState::from_amplitudes(amps, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary_and_matches_vertex_oracle(
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        n_half in 3usize..12,
        steps in 1usize..12,
    ) {
        let n = 2 * n_half;
        let mut chan = unit_state(n, &raw);
        let mut vert = to_vertex_state(&chan);
        for _ in 0..steps {
            chan = step_channel(&chan);
            vert = step_vertex(&vert);
        }
        prop_assert!((chan.norm_sqr() - 1.0).abs() < 1e-12);
        let back = to_channel_state(&vert).unwrap();
        for (a, b) in chan.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sampled_jump_sets_are_valid_involutions(
        seed in any::<u64>(),
        n_half in 3usize..24,
        j in 1usize..20,
        p in 0.0f64..0.95,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
    ) {
        let n = 2 * n_half;
        let j = 1 + j % (n - 1);
        prop_assume!(n / gcd(n, j) > 2);
        let params = DisorderParams::new(n, j, p, DisorderMode::Static).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = sample_jump_set(&params, &mut rng);
        // non-incidence: every touched slot is unique
        let mut touched: Vec<usize> = set
            .starts()
            .iter()
            .flat_map(|&i| [i, (i + j) % n])
            .collect();
        touched.sort_unstable();
        let before = touched.len();
        touched.dedup();
        prop_assert_eq!(before, touched.len());
        prop_assert!(set.len() <= n / 2);

        let state = unit_state(n, &raw);
        let moved = apply_jumps(&state, &set, j);
        prop_assert!((moved.norm_sqr() - state.norm_sqr()).abs() < 1e-15);
        let back = apply_jumps(&moved, &set, j);
        prop_assert_eq!(back.amplitudes(), state.amplitudes());
    }

    #[test]
    fn partition_function_matches_enumeration(
        n in 4usize..14,
        j in 1usize..13,
        p in 0.0f64..0.99,
    ) {
        prop_assume!(j < n && n / gcd(n, j) > 2);
        let params = DisorderParams::new(n, j, p, DisorderMode::Static).unwrap();
        let closed = partition_function(&params);
        let brute = partition_function_bruteforce(&params).unwrap();
        prop_assert!((closed - brute).abs() <= 1e-12 * closed.max(1.0));
    }

    #[test]
    fn entropies_are_label_invariant_and_variance_translates(
        raw in prop::collection::vec(0.01f64..1.0, 12),
        shift in 1usize..8,
    ) {
        let n = 32;
        let sum: f64 = raw.iter().sum();
        let mut dist = vec![0.0; n];
        for (k, v) in raw.iter().enumerate() {
            dist[k + 2] = v / sum;
        }
        let mut rotated = vec![0.0; n];
        for (k, &v) in dist.iter().enumerate() {
            rotated[(k + shift) % n] = v;
        }
        prop_assert!((shannon_entropy(&dist) - shannon_entropy(&rotated)).abs() < 1e-12);
        prop_assert!(
            (tsallis_entropy(&dist, 2.0).unwrap() - tsallis_entropy(&rotated, 2.0).unwrap()).abs()
                < 1e-12
        );
        // support stays away from the seam for these sizes, so the rotation
        // is a plain translation and variance must not move
        let var = position_variance(&dist).unwrap();
        let var_shifted = position_variance(&rotated).unwrap();
        prop_assert!((var - var_shifted).abs() < 1e-9, "{var} vs {var_shifted}");
    }
}

#[test]
fn sampler_is_exact_on_a_two_cycle_graph() {
    // N=9, j=2 has a single cycle of length 9; N=12, j=9 has g=3 cycles of
    // length 4. Check empirical frequencies against the measure on the
    // latter (multi-cycle) case with a coarse chi-square bound.
    use qwalk_core::disorder::{enumerate_jump_sets, jump_set_probability};
    use std::collections::HashMap;

    let params = DisorderParams::new(12, 9, 0.4, DisorderMode::Static).unwrap();
    let sets = enumerate_jump_sets(12, 9).unwrap();
    let sampler = JumpSampler::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let samples = 60_000;
    let mut counts: HashMap<_, usize> = HashMap::new();
    for _ in 0..samples {
        *counts.entry(sampler.sample(&mut rng)).or_insert(0) += 1;
    }
    let mut chi2 = 0.0;
    let mut df = 0usize;
    for set in &sets {
        let expect = jump_set_probability(set, &params).unwrap() * samples as f64;
        let observed = *counts.get(set).unwrap_or(&0) as f64;
        chi2 += (observed - expect).powi(2) / expect;
        df += 1;
    }
    // df = 343 outcomes − 1; 0.001 quantile ≈ 420. Keep a hard margin.
    assert!(df > 100);
    assert!(chi2 < 450.0, "chi2={chi2} df={}", df - 1);
}
