//! Monte Carlo simulator for 1-D discrete-time quantum walks on a cycle
//! whose connectivity is perturbed by fixed-size jumps.
//!
//! The walker lives on the N channels of a cycle and evolves by a brick-wall
//! of Hadamard mixes (equivalent to coin-then-shift in the vertex basis).
//! Disorder enters as random sets of non-incident transpositions exchanging
//! channels a fixed distance j apart, drawn exactly from a Gibbs-like
//! measure ℙ(π) ∝ p^tr(π) (1−p)^(N−2·tr(π)); static disorder reuses one set
//! per realization, dynamic disorder redraws it every timestep.
//!
//! Modules:
//! * [`walk`] — channel/vertex states, the mapping between them, one timestep.
//! * [`disorder`] — the jump measure: counts, partition function, exact
//!   sampler, jump application.
//! * [`engine`] — disorder-averaged Monte Carlo runs and parameter sweeps,
//!   deterministic under any thread count.
//! * [`stats`] — variance, Shannon/Tsallis entropies, Laplace tail fits,
//!   scaling collapse utilities.

pub mod disorder;
pub mod engine;
pub mod error;
pub mod rng;
pub mod stats;
pub mod walk;

pub use disorder::{
    apply_jumps, jump_set_probability, matching_count, partition_function,
    partition_function_bruteforce, sample_jump_set, CycleDecomposition, DisorderMode,
    DisorderParams, JumpSampler, JumpSet,
};
pub use engine::{
    run, run_dynamic, run_single, run_static, sweep, DistributionSeries, RunConfig, Snapshot,
    SweepConfig, SweepRow,
};
pub use error::{Error, Result};
pub use stats::{CenterMode, CollapsePoint, LaplaceFit, LineFit, Window};
pub use walk::{
    channel_to_vertex, step_channel, step_vertex, vertex_to_channel, ChannelState, Chirality,
    CoinMatrix, VertexState,
};
