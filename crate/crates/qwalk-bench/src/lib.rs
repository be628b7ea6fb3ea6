//! Shared fixtures for the criterion benchmarks.

use qwalk_core::{ChannelState, DisorderMode, DisorderParams, RunConfig};

pub fn unit_state(n: usize) -> ChannelState {
    ChannelState::localized(n, n / 2).unwrap()
}

pub fn disorder(n: usize, j: usize, p: f64, mode: DisorderMode) -> DisorderParams {
    DisorderParams::new(n, j, p, mode).unwrap()
}

pub fn run_config(
    n: usize,
    j: usize,
    p: f64,
    mode: DisorderMode,
    steps: usize,
    runs: usize,
) -> RunConfig {
    RunConfig {
        disorder: disorder(n, j, p, mode),
        steps,
        runs,
        initial_channel: 0.5,
        master_seed: 12345,
        record_every: steps.max(1),
        allow_wraparound: true,
    }
}
