//! The probability space of jump permutations.
//!
//! A jump configuration is a set of pairwise non-incident transpositions,
//! each exchanging the channels `i` and `i+j (mod N)`. Such sets are exactly
//! the matchings of the distance-j circulant graph on the N channel slots,
//! which splits into g = gcd(N, j) cycles of length M = N/g. A configuration
//! with k transpositions carries weight pᵏ(1−p)^(N−2k), normalized by the
//! partition function Z = (1 + (−p)^(N/g))^g.
//!
//! Sampling is exact: each cycle's matching is drawn by sequential
//! conditioning on path partition weights, with no rejection step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::ChannelState;

/// Upper N bound for the enumerative cross-check.
pub const ENUMERATION_LIMIT: usize = 20;

/// Disorder flavour: one jump configuration per realization, or a fresh one
/// at every timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderMode {
    Static,
    Dynamic,
}

impl std::fmt::Display for DisorderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DisorderMode::Static => write!(f, "static"),
            DisorderMode::Dynamic => write!(f, "dynamic"),
        }
    }
}

/// Parameters of the jump probability space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderParams {
    n: usize,
    j: usize,
    p: f64,
    mode: DisorderMode,
}

impl DisorderParams {
    /// Validates 0 < j < N, N/gcd(N, j) > 2 and p ∈ [0, 1].
    ///
    /// p = 1 is accepted only when N/gcd(N, j) is even; for odd cycle length
    /// the partition function vanishes at p = 1 and the measure is undefined.
    pub fn new(n: usize, j: usize, p: f64, mode: DisorderMode) -> Result<Self> {
        if j == 0 || j >= n {
            return Err(Error::InvalidJumpSize { j, n });
        }
        let g = gcd(n, j);
        let m = n / g;
        if m <= 2 {
            return Err(Error::JumpCycleTooShort { n, j, g });
        }
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::ProbabilityOutOfRange { p });
        }
        if p == 1.0 && m % 2 == 1 {
            return Err(Error::DegenerateMeasure { n, j, m });
        }
        Ok(DisorderParams { n, j, p, mode })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn jump_size(&self) -> usize {
        self.j
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn mode(&self) -> DisorderMode {
        self.mode
    }

    /// g = gcd(N, j): number of cycles of the jump graph.
    #[inline]
    pub fn cycle_count(&self) -> usize {
        gcd(self.n, self.j)
    }

    /// M = N/g: length of each cycle.
    #[inline]
    pub fn cycle_length(&self) -> usize {
        self.n / self.cycle_count()
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One jump configuration: the sorted transposition starts. Start `i`
/// exchanges slots `i` and `(i+j) mod N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct JumpSet {
    starts: Vec<usize>,
}

impl JumpSet {
    pub fn empty() -> Self {
        JumpSet::default()
    }

    /// Validates slot range and pairwise non-incidence for (n, j).
    pub fn new(mut starts: Vec<usize>, n: usize, j: usize) -> Result<Self> {
        starts.sort_unstable();
        let mut touched = vec![usize::MAX; n];
        for &i in &starts {
            if i >= n {
                return Err(Error::SlotOutOfRange { slot: i, n });
            }
            for slot in [i, (i + j) % n] {
                if touched[slot] != usize::MAX {
                    return Err(Error::IncidentTranspositions {
                        a: touched[slot],
                        b: i,
                    });
                }
                touched[slot] = i;
            }
        }
        Ok(JumpSet { starts })
    }

    fn from_sorted_unchecked(starts: Vec<usize>) -> Self {
        JumpSet { starts }
    }

    #[inline]
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// tr(π): the number of transpositions.
    #[inline]
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }
}

/// The g cycles of the jump graph; cycle r visits slots r, r+j, r+2j, …
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDecomposition {
    cycles: Vec<Vec<usize>>,
}

impl CycleDecomposition {
    pub fn new(n: usize, j: usize) -> Self {
        let g = gcd(n, j);
        let m = n / g;
        let cycles = (0..g)
            .map(|r| (0..m).map(|s| (r + s * j) % n).collect())
            .collect();
        CycleDecomposition { cycles }
    }

    #[inline]
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    #[inline]
    pub fn cycle_length(&self) -> usize {
        self.cycles.first().map_or(0, Vec::len)
    }
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// N_k: the number of k-edge matchings of the cycle C_M,
/// C(M−k, k) + C(M−k−1, k−1). Defined for M > 2.
pub fn matching_count(m: usize, k: usize) -> Result<u128> {
    if m <= 2 {
        return Err(Error::MatchingCycleTooShort { m });
    }
    let (m, k) = (m as i64, k as i64);
    Ok(binomial(m - k, k) + binomial(m - k - 1, k - 1))
}

/// Z = (1 + (−p)^(N/g))^g with g = gcd(N, j); strictly positive for valid
/// parameters.
pub fn partition_function(params: &DisorderParams) -> f64 {
    let m = params.cycle_length() as i32;
    let g = params.cycle_count() as i32;
    (1.0 + (-params.p()).powi(m)).powi(g)
}

/// Every valid jump configuration for (n, j), in lexicographic start order.
///
/// Exponential in N; guarded by [`ENUMERATION_LIMIT`].
pub fn enumerate_jump_sets(n: usize, j: usize) -> Result<Vec<JumpSet>> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n,
            max: ENUMERATION_LIMIT,
        });
    }
    if j == 0 || j >= n {
        return Err(Error::InvalidJumpSize { j, n });
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut current = Vec::new();
    fn recurse(
        from: usize,
        n: usize,
        j: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        out: &mut Vec<JumpSet>,
    ) {
        out.push(JumpSet::from_sorted_unchecked(current.clone()));
        for i in from..n {
            let partner = (i + j) % n;
            if used[i] || used[partner] || partner == i {
                continue;
            }
            used[i] = true;
            used[partner] = true;
            current.push(i);
            recurse(i + 1, n, j, used, current, out);
            current.pop();
            used[i] = false;
            used[partner] = false;
        }
    }
    recurse(0, n, j, &mut used, &mut current, &mut out);
    Ok(out)
}

/// Partition function by explicit enumeration of all valid configurations.
/// Independent cross-check of [`partition_function`]; N ≤ 20 only.
pub fn partition_function_bruteforce(params: &DisorderParams) -> Result<f64> {
    let sets = enumerate_jump_sets(params.n(), params.jump_size())?;
    let p = params.p();
    let n = params.n() as i32;
    Ok(sets
        .iter()
        .map(|s| p.powi(s.len() as i32) * (1.0 - p).powi(n - 2 * s.len() as i32))
        .sum())
}

/// ℙ(π) = p^tr(π) (1−p)^(N−2·tr(π)) / Z for a valid configuration.
pub fn jump_set_probability(set: &JumpSet, params: &DisorderParams) -> Result<f64> {
    // revalidate non-incidence under these params
    let checked = JumpSet::new(set.starts().to_vec(), params.n(), params.jump_size())?;
    let k = checked.len() as i32;
    let n = params.n() as i32;
    let p = params.p();
    Ok(p.powi(k) * (1.0 - p).powi(n - 2 * k) / partition_function(params))
}

/// Exact sampler for the jump measure.
///
/// Precomputes the path partition weights W(m) = (1−p)·W(m−1) + p·W(m−2)
/// once per parameter set; each sample then costs O(N). W obeys the closed
/// form (1 + (−1)^m p^(m+1))/(1+p), so it stays inside [1−p, 1] and plain
/// doubles never underflow.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    params: DisorderParams,
    decomposition: CycleDecomposition,
    /// W(0..=M): matching weight sums of paths with m vertices.
    path_weights: Vec<f64>,
}

impl JumpSampler {
    pub fn new(params: DisorderParams) -> Self {
        let m = params.cycle_length();
        let p = params.p();
        let mut w = vec![0.0; m + 1];
        w[0] = 1.0;
        w[1] = 1.0 - p;
        for i in 2..=m {
            w[i] = (1.0 - p) * w[i - 1] + p * w[i - 2];
        }
        JumpSampler {
            params,
            decomposition: CycleDecomposition::new(params.n(), params.jump_size()),
            path_weights: w,
        }
    }

    pub fn params(&self) -> &DisorderParams {
        &self.params
    }

    /// Draw one configuration distributed exactly per [`jump_set_probability`].
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> JumpSet {
        let p = self.params.p();
        if p == 0.0 {
            return JumpSet::empty();
        }
        let m = self.decomposition.cycle_length();
        let w = &self.path_weights;
        let mut starts = Vec::new();
        for cycle in self.decomposition.cycles() {
            // classify vertex 0 of the cycle: unmatched, matched to vertex 1,
            // or matched to vertex M-1 (the closure edge)
            let w_unmatched = (1.0 - p) * w[m - 1];
            let w_edge = p * w[m - 2];
            let total = w_unmatched + 2.0 * w_edge;
            debug_assert!(total > 0.0);
            let u = rng.random::<f64>() * total;
            let (mut s, hi) = if u < w_unmatched {
                (1usize, m - 1)
            } else if u < w_unmatched + w_edge {
                starts.push(cycle[0]);
                (2usize, m - 1)
            } else {
                starts.push(cycle[m - 1]);
                (1usize, m - 2)
            };
            // remaining path sampled left to right
            while s + 1 <= hi {
                let rem = hi - s + 1;
                let skip = (1.0 - p) * w[rem - 1];
                let take = p * w[rem - 2];
                if rng.random::<f64>() * (skip + take) < skip {
                    s += 1;
                } else {
                    starts.push(cycle[s]);
                    s += 2;
                }
            }
        }
        starts.sort_unstable();
        JumpSet::from_sorted_unchecked(starts)
    }
}

/// One-shot convenience wrapper over [`JumpSampler`].
pub fn sample_jump_set<R: Rng + ?Sized>(params: &DisorderParams, rng: &mut R) -> JumpSet {
    JumpSampler::new(*params).sample(rng)
}

/// Swap the amplitudes at slots i and (i+j) mod N for every start i.
/// Norm-preserving exactly; applying the same set twice is the identity.
pub fn apply_jumps(state: &ChannelState, set: &JumpSet, jump_size: usize) -> ChannelState {
    let mut next = state.clone();
    apply_jumps_in_place(&mut next, set, jump_size);
    next
}

pub fn apply_jumps_in_place(state: &mut ChannelState, set: &JumpSet, jump_size: usize) {
    let n = state.n_channels();
    let amps = state.amplitudes_mut();
    for &i in set.starts() {
        let partner = (i + jump_size) % n;
        amps.swap(i, partner);
    }
}

/// Coefficients of the generating function
/// F(x) = (1 + p x²)/(1 − x + x p − p x²) = Σ c_N x^N up to `order`,
/// computed from the linear recurrence the rational form induces:
/// c_N = (1−p)·c_(N−1) + p·c_(N−2) for N ≥ 3, with the numerator's p x²
/// term entering at order 2 (c_0 = 1, c_1 = 1−p, c_2 = (1−p)c_1 + p c_0 + p).
///
/// For N ≥ 1 the coefficient equals the coprime-j partition function
/// 1 + (−p)^N (the constant term absorbs the conventional −1).
pub fn generating_function_coefficients(p: f64, order: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(order + 1);
    c.push(1.0);
    if order >= 1 {
        c.push(1.0 - p);
    }
    if order >= 2 {
        c.push((1.0 - p) * c[1] + p * c[0] + p);
    }
    for n in 3..=order {
        let next = (1.0 - p) * c[n - 1] + p * c[n - 2];
        c.push(next);
    }
    c
}

/// Closed rational form of the generating function at `x`.
pub fn generating_function_value(p: f64, x: f64) -> f64 {
    (1.0 + p * x * x) / (1.0 - x + x * p - p * x * x)
}
