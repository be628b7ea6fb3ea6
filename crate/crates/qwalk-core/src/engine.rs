//! Monte Carlo disorder averaging of the jump-perturbed walk.
//!
//! Each run evolves a pure channel state (brick-wall step, then jumps) and
//! records |ψ|² snapshots; the engine averages the snapshots over runs.
//! Runs execute in parallel, but the reduction is a fixed midpoint-split
//! pairwise tree over run indices, so the floating-point result is identical
//! for any thread count.

use rayon::join;
use serde::{Deserialize, Serialize};

use crate::disorder::{
    apply_jumps_in_place, DisorderMode, DisorderParams, JumpSampler, JumpSet,
};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{self, CenterMode, Window};
use crate::walk::{slot_of_channel, step_channel_in_place, ChannelState};

/// Sweep points derive their seeds under this tag.
const SWEEP_SEED_TAG: u64 = 1;

/// Below this subtree size the pairwise reduction recurses sequentially;
/// the tree shape (and hence the sum) is unchanged.
const JOIN_CUTOFF: usize = 8;

/// Full description of one disorder-averaged simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub disorder: DisorderParams,
    /// Total timesteps T.
    pub steps: usize,
    /// Number of Monte Carlo runs R.
    pub runs: usize,
    /// Half-integer injection channel (default +½).
    pub initial_channel: f64,
    pub master_seed: u64,
    /// Snapshot stride; t = 0 and t = T are always recorded.
    pub record_every: usize,
    /// Permit N < 2T+2 (jump transport wraps the cycle regardless).
    pub allow_wraparound: bool,
}

impl RunConfig {
    /// Default cycle size for a T-step walk: 2T+16, even by construction,
    /// so the unperturbed light cone never wraps.
    pub fn default_n(steps: usize) -> usize {
        2 * steps + 16
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.disorder.n();
        if n <= 2 || n % 2 != 0 {
            return Err(Error::InvalidChannelCount { n });
        }
        if self.runs == 0 {
            return Err(Error::NoRuns);
        }
        if self.record_every == 0 {
            return Err(Error::InvalidStride);
        }
        if !self.allow_wraparound && n < 2 * self.steps + 2 {
            return Err(Error::WrapAround {
                steps: self.steps,
                required: 2 * self.steps + 2,
                n,
            });
        }
        slot_of_channel(n, self.initial_channel)?;
        Ok(())
    }

    pub fn initial_slot(&self) -> Result<usize> {
        slot_of_channel(self.disorder.n(), self.initial_channel)
    }

    /// The recorded timesteps: multiples of the stride plus the final step.
    pub fn record_times(&self) -> Vec<usize> {
        let mut times: Vec<usize> = (0..=self.steps).step_by(self.record_every).collect();
        if *times.last().unwrap() != self.steps {
            times.push(self.steps);
        }
        times
    }
}

/// Position distribution at one recorded timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub probabilities: Vec<f64>,
}

/// Per-timestep position distributions averaged over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSeries {
    pub config: RunConfig,
    pub snapshots: Vec<Snapshot>,
}

impl DistributionSeries {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("at least t=0 is recorded")
    }

    pub fn snapshot_at(&self, t: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }
}

/// Evolve one pure state under a per-timestep jump schedule and collect
/// |ψ|² at the recorded times. The schedule is called once per step with
/// the step index 0..T.
pub fn run_single<F>(config: &RunConfig, mut schedule: F) -> Result<Vec<Snapshot>>
where
    F: FnMut(usize) -> JumpSet,
{
    config.validate()?;
    let record = config.record_times();
    let jump_size = config.disorder.jump_size();
    let mut state = ChannelState::localized(config.disorder.n(), config.initial_slot()?)?;
    let mut snapshots = Vec::with_capacity(record.len());
    let mut next_record = record.iter().copied().peekable();
    if next_record.peek() == Some(&0) {
        next_record.next();
        snapshots.push(Snapshot {
            t: 0,
            probabilities: state.probabilities(),
        });
    }
    for t in 0..config.steps {
        step_channel_in_place(&mut state);
        let jumps = schedule(t);
        apply_jumps_in_place(&mut state, &jumps, jump_size);
        if next_record.peek() == Some(&(t + 1)) {
            next_record.next();
            snapshots.push(Snapshot {
                t: t + 1,
                probabilities: state.probabilities(),
            });
        }
    }
    Ok(snapshots)
}

/// Fixed-shape pairwise sum over run indices [lo, hi).
fn pairwise_sum<L>(lo: usize, hi: usize, leaf: &L) -> Vec<Vec<f64>>
where
    L: Fn(usize) -> Vec<Vec<f64>> + Sync,
{
    debug_assert!(lo < hi);
    if hi - lo == 1 {
        return leaf(lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (mut left, right) = if hi - lo > JOIN_CUTOFF {
        join(|| pairwise_sum(lo, mid, leaf), || pairwise_sum(mid, hi, leaf))
    } else {
        (pairwise_sum(lo, mid, leaf), pairwise_sum(mid, hi, leaf))
    };
    for (acc, add) in left.iter_mut().zip(&right) {
        for (a, b) in acc.iter_mut().zip(add) {
            *a += *b;
        }
    }
    left
}

fn average_runs<L>(config: &RunConfig, leaf: L) -> Result<DistributionSeries>
where
    L: Fn(usize) -> Vec<Vec<f64>> + Sync,
{
    config.validate()?;
    let record = config.record_times();
    let sums = pairwise_sum(0, config.runs, &leaf);
    let scale = 1.0 / config.runs as f64;
    let snapshots = record
        .into_iter()
        .zip(sums)
        .map(|(t, mut probabilities)| {
            for p in &mut probabilities {
                *p *= scale;
            }
            Snapshot { t, probabilities }
        })
        .collect();
    Ok(DistributionSeries {
        config: *config,
        snapshots,
    })
}

fn probabilities_of(snapshots: Vec<Snapshot>) -> Vec<Vec<f64>> {
    snapshots.into_iter().map(|s| s.probabilities).collect()
}

/// Static disorder: each run draws one configuration (stream timestep 0)
/// and reapplies it at every step.
pub fn run_static(config: &RunConfig) -> Result<DistributionSeries> {
    config.validate()?;
    let sampler = JumpSampler::new(config.disorder);
    let seed = config.master_seed;
    average_runs(config, move |run| {
        let mut rng = rng::stream(seed, run as u64, 0);
        let jumps = sampler.sample(&mut rng);
        let snaps = run_single(config, |_| jumps.clone()).expect("validated config");
        probabilities_of(snaps)
    })
}

/// Dynamic disorder: a fresh configuration per timestep of every run,
/// drawn from the (master_seed, run, timestep) stream.
pub fn run_dynamic(config: &RunConfig) -> Result<DistributionSeries> {
    config.validate()?;
    let sampler = JumpSampler::new(config.disorder);
    let seed = config.master_seed;
    average_runs(config, move |run| {
        let snaps = run_single(config, |t| {
            let mut rng = rng::stream(seed, run as u64, t as u64 + 1);
            sampler.sample(&mut rng)
        })
        .expect("validated config");
        probabilities_of(snaps)
    })
}

/// Dispatch on the configured mode.
pub fn run(config: &RunConfig) -> Result<DistributionSeries> {
    match config.disorder.mode() {
        DisorderMode::Static => run_static(config),
        DisorderMode::Dynamic => run_dynamic(config),
    }
}

/// One sweep grid point: final-time observables, Laplace fits and the
/// rescaled collapse coordinates. Fields are None where the point or a fit
/// failed; `error` carries the diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub j: usize,
    pub variance: Option<f64>,
    pub shannon: Option<f64>,
    pub tsallis2: Option<f64>,
    pub inv_a_whole: Option<f64>,
    pub inv_a_peak: Option<f64>,
    /// p·j^α
    pub x: Option<f64>,
    /// j^(−β)·Var
    pub y: Option<f64>,
    pub error: Option<String>,
}

/// Sweep-wide settings: the base run shape plus the collapse exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub mode: DisorderMode,
    pub steps: usize,
    pub runs: usize,
    pub initial_channel: f64,
    pub master_seed: u64,
    pub allow_wraparound: bool,
    pub alpha: f64,
    pub beta: f64,
}

/// Run every (p, j) grid point and collect the flat result table.
/// Invalid points become error rows; the sweep continues.
pub fn sweep(config: &SweepConfig, p_values: &[f64], j_values: &[usize]) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(p_values.len() * j_values.len());
    let mut index = 0u64;
    for &j in j_values {
        for &p in p_values {
            let seed = rng::derive_seed(config.master_seed, SWEEP_SEED_TAG, index);
            index += 1;
            rows.push(sweep_point(config, p, j, seed));
        }
    }
    rows
}

fn sweep_point(config: &SweepConfig, p: f64, j: usize, seed: u64) -> SweepRow {
    let mut row = SweepRow {
        p,
        j,
        variance: None,
        shannon: None,
        tsallis2: None,
        inv_a_whole: None,
        inv_a_peak: None,
        x: None,
        y: None,
        error: None,
    };
    let disorder = match DisorderParams::new(config.n, j, p, config.mode) {
        Ok(d) => d,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let run_config = RunConfig {
        disorder,
        steps: config.steps,
        runs: config.runs,
        initial_channel: config.initial_channel,
        master_seed: seed,
        record_every: config.steps.max(1),
        allow_wraparound: config.allow_wraparound,
    };
    let series = match run(&run_config) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let dist = &series.final_snapshot().probabilities;
    match stats::position_variance(dist) {
        Ok(var) => {
            row.variance = Some(var);
            row.x = Some(p * (j as f64).powf(config.alpha));
            row.y = Some((j as f64).powf(-config.beta) * var);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row.shannon = Some(stats::shannon_entropy(dist));
    row.tsallis2 = stats::tsallis_entropy(dist, 2.0).ok();
    let mu = config.initial_channel;
    let floor = stats::monte_carlo_floor(config.runs, config.n);
    match stats::laplace_fit(
        dist,
        Window::whole_distribution(mu, config.steps),
        CenterMode::Fixed(mu),
        floor,
    ) {
        Ok(fit) => row.inv_a_whole = Some(fit.inv_a),
        Err(e) => {
            row.error
                .get_or_insert_with(|| format!("whole-distribution fit: {e}"));
        }
    }
    match stats::laplace_fit(
        dist,
        Window::central_peak(mu, j),
        CenterMode::Fixed(mu),
        floor,
    ) {
        Ok(fit) => row.inv_a_peak = Some(fit.inv_a),
        Err(e) => {
            row.error
                .get_or_insert_with(|| format!("central-peak fit: {e}"));
        }
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_config(p: f64, mode: DisorderMode) -> RunConfig {
        RunConfig {
            disorder: DisorderParams::new(32, 3, p, mode).unwrap(),
            steps: 8,
            runs: 16,
            initial_channel: 0.5,
            master_seed: 99,
            record_every: 1,
            allow_wraparound: false,
        }
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut c = small_config(0.2, DisorderMode::Static);
        c.runs = 0;
        assert!(matches!(c.validate(), Err(Error::NoRuns)));
        let mut c = small_config(0.2, DisorderMode::Static);
        c.record_every = 0;
        assert!(matches!(c.validate(), Err(Error::InvalidStride)));
        let mut c = small_config(0.2, DisorderMode::Static);
        c.steps = 100;
        assert!(matches!(c.validate(), Err(Error::WrapAround { .. })));
        c.allow_wraparound = true;
        assert!(c.validate().is_ok());
        let mut c = small_config(0.2, DisorderMode::Static);
        c.initial_channel = 0.7;
        assert!(c.validate().is_err());
    }

    #[test]
    fn t0_yields_single_delta_snapshot() {
        let mut c = small_config(0.3, DisorderMode::Static);
        c.steps = 0;
        let series = run_static(&c).unwrap();
        assert_eq!(series.snapshots.len(), 1);
        let probs = &series.snapshots[0].probabilities;
        assert_eq!(probs[16], 1.0);
        assert_eq!(probs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn p0_is_deterministic_and_unperturbed() {
        let c = small_config(0.0, DisorderMode::Static);
        let series = run_static(&c).unwrap();
        let reference = run_single(&c, |_| JumpSet::empty()).unwrap();
        for (s, r) in series.snapshots.iter().zip(&reference) {
            assert_eq!(s.t, r.t);
            for (a, b) in s.probabilities.iter().zip(&r.probabilities) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
        let dynamic = run_dynamic(&RunConfig {
            disorder: DisorderParams::new(32, 3, 0.0, DisorderMode::Dynamic).unwrap(),
            ..c
        })
        .unwrap();
        for (s, r) in dynamic.snapshots.iter().zip(&reference) {
            for (a, b) in s.probabilities.iter().zip(&r.probabilities) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn r1_static_equals_run_single_with_sampled_schedule() {
        let mut c = small_config(0.4, DisorderMode::Static);
        c.runs = 1;
        let series = run_static(&c).unwrap();
        let sampler = JumpSampler::new(c.disorder);
        let mut stream = rng::stream(c.master_seed, 0, 0);
        let jumps = sampler.sample(&mut stream);
        let reference = run_single(&c, |_| jumps.clone()).unwrap();
        for (s, r) in series.snapshots.iter().zip(&reference) {
            assert_eq!(s.probabilities, r.probabilities);
        }
    }

    #[test]
    fn swap_outside_light_cone_is_invisible() {
        let mut c = small_config(0.0, DisorderMode::Static);
        c.steps = 4; // support stays within ±4 of slot 16
        let far = JumpSet::new(vec![26], 32, 3).unwrap(); // touches slots 26, 29
        let perturbed = run_single(&c, |_| far.clone()).unwrap();
        let clean = run_single(&c, |_| JumpSet::empty()).unwrap();
        for (a, b) in perturbed.iter().zip(&clean) {
            assert_eq!(a.probabilities, b.probabilities);
        }
    }

    #[test]
    fn snapshots_are_normalized_distributions() {
        for mode in [DisorderMode::Static, DisorderMode::Dynamic] {
            let c = small_config(0.35, mode);
            let series = run(&c).unwrap();
            assert_eq!(series.snapshots.len(), c.steps + 1);
            for snap in &series.snapshots {
                let sum: f64 = snap.probabilities.iter().sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-9);
                assert!(snap.probabilities.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn identical_seeds_give_identical_series() {
        for mode in [DisorderMode::Static, DisorderMode::Dynamic] {
            let c = small_config(0.25, mode);
            let a = run(&c).unwrap();
            let b = run(&c).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn reduction_order_is_thread_count_independent_by_construction() {
        // The pairwise tree is fixed; running the same workload inside
        // single- and multi-threaded pools must agree bit for bit.
        let c = small_config(0.3, DisorderMode::Dynamic);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_dynamic(&c).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_dynamic(&c).unwrap());
        assert_eq!(one, many);
    }

    #[test]
    fn jump_support_grows_at_most_one_plus_j_per_step() {
        let n = 64;
        let j = 5;
        let c = RunConfig {
            disorder: DisorderParams::new(n, j, 0.8, DisorderMode::Dynamic).unwrap(),
            steps: 6,
            runs: 1,
            initial_channel: 0.5,
            master_seed: 5,
            record_every: 1,
            allow_wraparound: true,
        };
        let series = run_dynamic(&c).unwrap();
        let start = n / 2;
        for snap in &series.snapshots {
            let reach = (snap.t * (1 + j)) as i64;
            for (slot, &prob) in snap.probabilities.iter().enumerate() {
                if prob > 0.0 {
                    let d = (slot as i64 - start as i64).abs().min(
                        n as i64 - (slot as i64 - start as i64).abs(),
                    );
                    assert!(d <= reach, "t={} slot={slot} d={d}", snap.t);
                }
            }
        }
    }

    #[test]
    fn sweep_handles_empty_and_invalid_points() {
        let config = SweepConfig {
            n: 48,
            mode: DisorderMode::Static,
            steps: 16,
            runs: 8,
            initial_channel: 0.5,
            master_seed: 4,
            allow_wraparound: false,
            alpha: 1.04,
            beta: 1.67,
        };
        assert!(sweep(&config, &[], &[]).is_empty());
        let rows = sweep(&config, &[0.0, 0.2], &[5, 24]);
        assert_eq!(rows.len(), 4);
        // j=24 divides 48 with N/g = 2: invalid, recorded not panicked
        for row in rows.iter().filter(|r| r.j == 24) {
            assert!(row.error.is_some());
            assert!(row.variance.is_none());
        }
        let p0 = rows.iter().find(|r| r.j == 5 && r.p == 0.0).unwrap();
        assert!(p0.variance.is_some());
        // p=0 variance equals the unperturbed walk's variance
        let clean = run_single(
            &RunConfig {
                disorder: DisorderParams::new(48, 5, 0.0, DisorderMode::Static).unwrap(),
                steps: 16,
                runs: 1,
                initial_channel: 0.5,
                master_seed: 0,
                record_every: 16,
                allow_wraparound: false,
            },
            |_| JumpSet::empty(),
        )
        .unwrap();
        let clean_var =
            crate::stats::position_variance(&clean.last().unwrap().probabilities).unwrap();
        assert_abs_diff_eq!(p0.variance.unwrap(), clean_var, epsilon = 1e-12);
    }
}
