//! Fast invariant suite behind `qwalk selftest`: exact combinatorics, the
//! sampler goodness-of-fit, the channel/vertex oracle, observable
//! identities and determinism, each reported as one pass/fail line.

use num_complex::Complex64;
use qwalk_core::disorder::{
    enumerate_jump_sets, gcd, generating_function_coefficients, generating_function_value,
    jump_set_probability, matching_count, partition_function, partition_function_bruteforce,
    DisorderMode, DisorderParams, JumpSampler,
};
use qwalk_core::engine::{run_dynamic, run_static, RunConfig};
use qwalk_core::stats::{
    laplace_fit, linear_fit, position_variance, shannon_entropy, tsallis_entropy, CenterMode,
    Window,
};
use qwalk_core::walk::{
    channel_coordinate, step_channel_in_place_with_coin, step_vertex, to_channel_state,
    to_vertex_state, ChannelState, CoinMatrix,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;

/// Environment hook that corrupts the coin used by the unitarity check, so
/// the check's failure path can itself be exercised.
pub const CORRUPT_COIN_ENV: &str = "QWALK_SELFTEST_CORRUPT_COIN";

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("[PASS] {name} — {detail}");
        } else {
            self.failures += 1;
            println!("[FAIL] {name} — {detail}");
        }
    }
}

fn coin_under_test() -> CoinMatrix {
    let mut coin = CoinMatrix::hadamard();
    if std::env::var(CORRUPT_COIN_ENV).is_ok_and(|v| v == "1") {
        coin.entries[0][0] += Complex64::new(0.05, 0.0);
    }
    coin
}

fn check_unitarity(report: &mut Report) {
    let coin = coin_under_test();
    let coin_err = coin.unitarity_error();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 32;
    let mut worst = coin_err;
    for _ in 0..20 {
        let mut amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut state = ChannelState::from_amplitudes(amps, 0).unwrap();
        for _ in 0..16 {
            step_channel_in_place_with_coin(&mut state, &coin);
        }
        worst = worst.max((state.norm_sqr() - 1.0).abs());
    }
    report.check(
        "coin unitarity and norm preservation",
        worst < 1e-12,
        format!("max deviation {worst:.2e}"),
    );
}

fn check_oracle_equivalence(report: &mut Report) {
    let n = 32;
    let steps = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let mut amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut chan = ChannelState::from_amplitudes(amps, 0).unwrap();
        let mut vert = to_vertex_state(&chan);
        for _ in 0..steps {
            chan = qwalk_core::walk::step_channel(&chan);
            vert = step_vertex(&vert);
        }
        let back = to_channel_state(&vert).unwrap();
        for (a, b) in chan.amplitudes().iter().zip(back.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
    }
    report.check(
        "channel/vertex evolution equivalence",
        worst < 1e-12,
        format!("max elementwise deviation {worst:.2e} over {steps} steps"),
    );
}

fn check_partition_function(report: &mut Report) {
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for n in 4..=12 {
        for j in 1..n {
            if n / gcd(n, j) <= 2 {
                continue;
            }
            for p in [0.1, 0.3, 0.7] {
                let params = DisorderParams::new(n, j, p, DisorderMode::Static).unwrap();
                let closed = partition_function(&params);
                let brute = partition_function_bruteforce(&params).unwrap();
                worst = worst.max(((closed - brute) / closed).abs());
                cases += 1;
            }
        }
    }
    report.check(
        "partition function closed form vs enumeration",
        worst <= 1e-12,
        format!("{cases} cases, worst relative error {worst:.2e}"),
    );
}

fn check_matching_counts(report: &mut Report) {
    let mut ok = true;
    for m in 3..=10 {
        let sets = enumerate_jump_sets(m, 1).unwrap();
        let mut by_size: HashMap<usize, u128> = HashMap::new();
        for s in &sets {
            *by_size.entry(s.len()).or_insert(0) += 1;
        }
        for k in 0..=m / 2 {
            if matching_count(m, k).unwrap() != *by_size.get(&k).unwrap_or(&0) {
                ok = false;
            }
        }
    }
    report.check(
        "matching counts vs enumeration",
        ok,
        "C(M−k,k)+C(M−k−1,k−1) for M ≤ 10".into(),
    );
}

fn chi_square_case(n: usize, j: usize, p: f64, samples: usize, seed: u64) -> (f64, f64) {
    let params = DisorderParams::new(n, j, p, DisorderMode::Static).unwrap();
    let sets = enumerate_jump_sets(n, j).unwrap();
    let sampler = JumpSampler::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: HashMap<_, usize> = HashMap::new();
    for _ in 0..samples {
        *counts.entry(sampler.sample(&mut rng)).or_insert(0) += 1;
    }
    let mut chi2 = 0.0;
    for set in &sets {
        let expected = jump_set_probability(set, &params).unwrap() * samples as f64;
        let observed = *counts.get(set).unwrap_or(&0) as f64;
        chi2 += (observed - expected).powi(2) / expected;
    }
    let threshold = ChiSquared::new((sets.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    (chi2, threshold)
}

fn check_sampler(report: &mut Report) {
    let (chi_a, thr_a) = chi_square_case(8, 1, 0.3, 20_000, 11);
    let (chi_b, thr_b) = chi_square_case(9, 2, 0.5, 20_000, 12);
    report.check(
        "jump sampler chi-square goodness of fit",
        chi_a < thr_a && chi_b < thr_b,
        format!("(N=8,j=1,p=0.3): {chi_a:.1} < {thr_a:.1}; (N=9,j=2,p=0.5): {chi_b:.1} < {thr_b:.1}"),
    );
}

fn check_observable_identities(report: &mut Report) {
    let mut ok = true;
    let mut delta = vec![0.0; 64];
    delta[40] = 1.0;
    ok &= position_variance(&delta).unwrap().abs() < 1e-12;
    ok &= shannon_entropy(&delta) == 0.0;
    let uniform = vec![1.0 / 64.0; 64];
    ok &= (shannon_entropy(&uniform) - 64f64.ln()).abs() < 1e-12;
    ok &= (tsallis_entropy(&uniform, 2.0).unwrap() - (1.0 - 1.0 / 64.0)).abs() < 1e-12;
    let skew = vec![0.5, 0.25, 0.125, 0.0625, 0.0625];
    ok &= (tsallis_entropy(&skew, 1.0 + 1e-7).unwrap() - shannon_entropy(&skew)).abs() < 1e-4;

    let n = 128;
    let raw: Vec<f64> = (0..n)
        .map(|k| (-(channel_coordinate(n, k) - 0.5).abs() / 4.0).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    let laplace: Vec<f64> = raw.into_iter().map(|v| v / total).collect();
    let fit = laplace_fit(
        &laplace,
        Window::whole_distribution(0.5, 60),
        CenterMode::Fixed(0.5),
        0.0,
    )
    .unwrap();
    ok &= (fit.inv_a - 0.25).abs() < 1e-9;

    let line = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 4.0, 7.0]).unwrap();
    ok &= (line.slope - 3.0).abs() < 1e-12 && (line.r_squared - 1.0).abs() < 1e-12;
    report.check(
        "entropy/variance/fit identities",
        ok,
        "delta, uniform, Tsallis q→1, synthetic exponential, exact line".into(),
    );
}

fn check_generating_function(report: &mut Report) {
    let mut ok = true;
    for p in [0.2, 0.5] {
        let coeffs = generating_function_coefficients(p, 15);
        for (n, c) in coeffs.iter().enumerate().skip(1) {
            ok &= (*c - (1.0 + (-p).powi(n as i32))).abs() < 1e-12;
        }
        let x = 0.1f64;
        let partial: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * x.powi(n as i32))
            .sum();
        ok &= (partial - generating_function_value(p, x)).abs() < 1e-12;
    }
    report.check(
        "partition-function generating function",
        ok,
        "recurrence coefficients vs closed form, series vs rational at x=0.1".into(),
    );
}

fn check_determinism(report: &mut Report) {
    let config = RunConfig {
        disorder: DisorderParams::new(64, 5, 0.3, DisorderMode::Static).unwrap(),
        steps: 24,
        runs: 32,
        initial_channel: 0.5,
        master_seed: 77,
        record_every: 8,
        allow_wraparound: false,
    };
    let a = run_static(&config).unwrap();
    let b = run_static(&config).unwrap();
    let dynamic_config = RunConfig {
        disorder: DisorderParams::new(64, 5, 0.3, DisorderMode::Dynamic).unwrap(),
        ..config
    };
    let c = run_dynamic(&dynamic_config).unwrap();
    let d = run_dynamic(&dynamic_config).unwrap();
    report.check(
        "repeatable seeded runs",
        a == b && c == d,
        "static and dynamic series identical across invocations".into(),
    );
}

/// Run all checks; returns true when everything passed. Total runtime is a
/// few seconds.
pub fn run_selftest() -> bool {
    let mut report = Report { failures: 0 };
    check_unitarity(&mut report);
    check_oracle_equivalence(&mut report);
    check_partition_function(&mut report);
    check_matching_counts(&mut report);
    check_sampler(&mut report);
    check_observable_identities(&mut report);
    check_generating_function(&mut report);
    check_determinism(&mut report);
    if report.failures == 0 {
        println!("selftest: all checks passed");
        true
    } else {
        println!("selftest: {} check(s) FAILED", report.failures);
        false
    }
}
