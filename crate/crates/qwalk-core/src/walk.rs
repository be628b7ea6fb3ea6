//! Walker states and the unperturbed quantum-walk timestep.
//!
//! Two equivalent representations are kept:
//!
//! * the vertex basis `|position, chirality⟩` (2N amplitudes on a cycle of N
//!   sites), evolved by coin-then-shift, and
//! * the channel basis (N amplitudes on the edges of the cycle, labelled by
//!   half-integer coordinates), evolved by a brick-wall of 2×2 mixes.
//!
//! The two are related slot-by-slot through a time-dependent bijection; the
//! channel form is the production representation, the vertex form serves as
//! its oracle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Norm tolerance accepted when constructing states from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Coin degree of freedom. Basis order is (R, L): row/column 0 of the coin
/// matrix refers to R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chirality {
    R,
    L,
}

impl Chirality {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Chirality::R => 0,
            Chirality::L => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Chirality::R => "R",
            Chirality::L => "L",
        }
    }
}

/// A 2×2 coin. The walk itself is fixed to the Hadamard coin; arbitrary
/// coins are accepted so tests can inject faults and probe unitarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinMatrix {
    /// Row-major entries in (R, L) basis order.
    pub entries: [[Complex64; 2]; 2],
}

impl CoinMatrix {
    /// The Hadamard coin (1/√2)·[[1, 1], [1, −1]].
    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        CoinMatrix {
            entries: [[h, h], [h, -h]],
        }
    }

    /// Max-norm deviation of M·M† from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let m = &self.entries;
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += m[r][k] * m[c][k].conj();
                }
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Apply the coin to an (R, L) amplitude pair.
    #[inline]
    pub fn apply(&self, a_r: Complex64, a_l: Complex64) -> (Complex64, Complex64) {
        (
            self.entries[0][0] * a_r + self.entries[0][1] * a_l,
            self.entries[1][0] * a_r + self.entries[1][1] * a_l,
        )
    }
}

fn check_channel_count(n: usize) -> Result<()> {
    if n <= 2 || n % 2 != 0 {
        return Err(Error::InvalidChannelCount { n });
    }
    Ok(())
}

fn check_norm(norm_sqr: f64) -> Result<()> {
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized {
            norm_sqr,
            tolerance: NORM_TOLERANCE,
        });
    }
    Ok(())
}

/// Pure walker state over the N channels of the cycle.
///
/// Slot `k` holds the amplitude of the half-integer channel
/// `k − N/2 + ½`; the two origin channels ∓½ sit at slots N/2−1 and N/2.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    amplitudes: Vec<Complex64>,
    time: usize,
}

impl ChannelState {
    /// δ-state on the channel at `slot`, at t = 0.
    pub fn localized(n: usize, slot: usize) -> Result<Self> {
        check_channel_count(n)?;
        if slot >= n {
            return Err(Error::SlotOutOfRange { slot, n });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[slot] = Complex64::new(1.0, 0.0);
        Ok(ChannelState {
            amplitudes,
            time: 0,
        })
    }

    /// Build from raw amplitudes; the vector must be unit-norm within
    /// [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>, time: usize) -> Result<Self> {
        check_channel_count(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        check_norm(norm_sqr)?;
        Ok(ChannelState { amplitudes, time })
    }

    #[inline]
    pub fn n_channels(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn time(&self) -> usize {
        self.time
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |ψ|² per slot.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Half-integer coordinate of `slot`.
    #[inline]
    pub fn coordinate(&self, slot: usize) -> f64 {
        channel_coordinate(self.n_channels(), slot)
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub(crate) fn advance_time(&mut self) {
        self.time += 1;
    }
}

/// Half-integer coordinate of `slot` on an N-cycle: `k − N/2 + ½`.
#[inline]
pub fn channel_coordinate(n: usize, slot: usize) -> f64 {
    slot as f64 - n as f64 / 2.0 + 0.5
}

/// Slot holding the channel with half-integer coordinate `channel`.
pub fn slot_of_channel(n: usize, channel: f64) -> Result<usize> {
    check_channel_count(n)?;
    let raw = channel + n as f64 / 2.0 - 0.5;
    let slot = raw.round();
    if (raw - slot).abs() > 1e-9 || slot < 0.0 || slot >= n as f64 {
        return Err(Error::InvalidChannelCoordinate { channel, n });
    }
    Ok(slot as usize)
}

/// Pure walker state in the vertex ⊗ coin basis; index `2·position + chirality`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexState {
    amplitudes: Vec<Complex64>,
    time: usize,
}

impl VertexState {
    /// δ-state on `|position, chirality⟩` at t = 0.
    pub fn localized(n: usize, position: usize, chirality: Chirality) -> Result<Self> {
        check_channel_count(n)?;
        if position >= n {
            return Err(Error::SlotOutOfRange { slot: position, n });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * n];
        amplitudes[2 * position + chirality.index()] = Complex64::new(1.0, 0.0);
        Ok(VertexState {
            amplitudes,
            time: 0,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>, time: usize) -> Result<Self> {
        if amplitudes.len() % 2 != 0 {
            return Err(Error::InvalidChannelCount {
                n: amplitudes.len() / 2,
            });
        }
        check_channel_count(amplitudes.len() / 2)?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        check_norm(norm_sqr)?;
        Ok(VertexState { amplitudes, time })
    }

    #[inline]
    pub fn n_positions(&self) -> usize {
        self.amplitudes.len() / 2
    }

    #[inline]
    pub fn time(&self) -> usize {
        self.time
    }

    #[inline]
    pub fn amplitude(&self, position: usize, chirality: Chirality) -> Complex64 {
        self.amplitudes[2 * position + chirality.index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Position marginal: Σ_chirality |ψ(n, c)|².
    pub fn position_probabilities(&self) -> Vec<f64> {
        (0..self.n_positions())
            .map(|p| {
                self.amplitudes[2 * p].norm_sqr() + self.amplitudes[2 * p + 1].norm_sqr()
            })
            .collect()
    }
}

/// Vertex-basis label of channel `slot` at time `t`.
///
/// At even t an even-n channel carries an L-mover into vertex n and an odd-n
/// channel carries an R-mover into vertex n+1; at odd t the roles swap.
pub fn channel_to_vertex(n: usize, slot: usize, t: usize) -> Result<(usize, Chirality)> {
    check_channel_count(n)?;
    if slot >= n {
        return Err(Error::SlotOutOfRange { slot, n });
    }
    // signed n of the half-integer channel n+1/2
    let signed = slot as i64 - n as i64 / 2;
    let n_even = signed.rem_euclid(2) == 0;
    let t_even = t % 2 == 0;
    let (pos, chir) = if n_even == t_even {
        (signed, Chirality::L)
    } else {
        (signed + 1, Chirality::R)
    };
    Ok((pos.rem_euclid(n as i64) as usize, chir))
}

/// Slot of the channel identified with `|position, chirality⟩` at time `t`.
///
/// Errors when the state lies outside the parity-allowed image
/// (position parity must match t).
pub fn vertex_to_channel(n: usize, position: usize, chirality: Chirality, t: usize) -> Result<usize> {
    check_channel_count(n)?;
    if position >= n {
        return Err(Error::SlotOutOfRange { slot: position, n });
    }
    if position % 2 != t % 2 {
        return Err(Error::OutsideParityImage {
            position,
            chirality: chirality.name(),
            time: t,
        });
    }
    let half = (n / 2) as i64;
    let slot = match chirality {
        Chirality::L => (position as i64 + half).rem_euclid(n as i64),
        Chirality::R => (position as i64 - 1 + half).rem_euclid(n as i64),
    };
    Ok(slot as usize)
}

/// Expand a channel state into its vertex-basis form at the same time.
pub fn to_vertex_state(state: &ChannelState) -> VertexState {
    let n = state.n_channels();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * n];
    for slot in 0..n {
        let (pos, chir) = channel_to_vertex(n, slot, state.time()).expect("slot in range");
        amplitudes[2 * pos + chir.index()] = state.amplitudes()[slot];
    }
    VertexState {
        amplitudes,
        time: state.time(),
    }
}

/// Contract a vertex state back onto channels. Errors if any amplitude sits
/// outside the parity-allowed image at the state's time.
pub fn to_channel_state(state: &VertexState) -> Result<ChannelState> {
    let n = state.n_positions();
    let t = state.time();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
    for pos in 0..n {
        for chir in [Chirality::R, Chirality::L] {
            let a = state.amplitude(pos, chir);
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let slot = vertex_to_channel(n, pos, chir, t)?;
            amplitudes[slot] = a;
        }
    }
    Ok(ChannelState { amplitudes, time: t })
}

/// One coin-then-shift step in the vertex basis:
/// C = I ⊗ M followed by S: |n,L⟩→|n+1,R⟩, |n,R⟩→|n−1,L⟩ (indices mod N).
pub fn step_vertex(state: &VertexState) -> VertexState {
    step_vertex_with_coin(state, &CoinMatrix::hadamard())
}

pub fn step_vertex_with_coin(state: &VertexState, coin: &CoinMatrix) -> VertexState {
    let n = state.n_positions();
    let mut next = vec![Complex64::new(0.0, 0.0); 2 * n];
    for pos in 0..n {
        let a_r = state.amplitudes[2 * pos];
        let a_l = state.amplitudes[2 * pos + 1];
        if a_r == Complex64::new(0.0, 0.0) && a_l == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (out_r, out_l) = coin.apply(a_r, a_l);
        let right = (pos + 1) % n;
        let left = (pos + n - 1) % n;
        // S = Σ |n+1,R⟩⟨n,L| + |n−1,L⟩⟨n,R|: the post-coin L component moves
        // right and arrives as R, the R component moves left and arrives as L.
        next[2 * right] += out_l;
        next[2 * left + 1] += out_r;
    }
    VertexState {
        amplitudes: next,
        time: state.time + 1,
    }
}

/// One brick-wall step in the channel basis.
pub fn step_channel(state: &ChannelState) -> ChannelState {
    let mut next = state.clone();
    step_channel_in_place(&mut next);
    next
}

/// In-place brick-wall step with the Hadamard coin.
pub fn step_channel_in_place(state: &mut ChannelState) {
    step_channel_in_place_with_coin(state, &CoinMatrix::hadamard());
}

/// In-place brick-wall step with an arbitrary coin.
///
/// Every vertex v with v ≡ t (mod 2) mixes its two incident channels: the
/// pair (v−½, v+½) enters the coin as (R, L). Per the shift convention the
/// R output leaves leftward (it becomes |v−1, L⟩, i.e. channel v−½ again)
/// and the L output rightward (|v+1, R⟩, channel v+½), so the pair is
/// mapped onto itself by the plain coin matrix and the mix of a fixed pair
/// is an involution for the Hadamard.
pub fn step_channel_in_place_with_coin(state: &mut ChannelState, coin: &CoinMatrix) {
    let n = state.n_channels();
    let t = state.time;
    let half = n / 2;
    let amps = state.amplitudes_mut();
    let mut v = t % 2;
    for _ in 0..n / 2 {
        let k_plus = (v + half) % n;
        let k_minus = (k_plus + n - 1) % n;
        let in_r = amps[k_minus];
        let in_l = amps[k_plus];
        let (out_r, out_l) = coin.apply(in_r, in_l);
        amps[k_minus] = out_r;
        amps[k_plus] = out_l;
        v += 2;
    }
    state.advance_time();
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_channel_state(n: usize, time: usize, rng: &mut ChaCha8Rng) -> ChannelState {
        let mut amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        ChannelState::from_amplitudes(amps, time).unwrap()
    }

    #[test]
    fn hadamard_is_unitary() {
        assert!(CoinMatrix::hadamard().unitarity_error() < 1e-14);
    }

    #[test]
    fn rejects_bad_channel_counts() {
        assert!(ChannelState::localized(2, 0).is_err());
        assert!(ChannelState::localized(7, 0).is_err());
        assert!(ChannelState::localized(8, 8).is_err());
    }

    #[test]
    fn mapping_examples_at_origin() {
        // channel +1/2 (n=0) at t=0 is |0,L>; channel -1/2 (n=-1) is |0,R>
        let n = 16;
        assert_eq!(channel_to_vertex(n, 8, 0).unwrap(), (0, Chirality::L));
        assert_eq!(channel_to_vertex(n, 7, 0).unwrap(), (0, Chirality::R));
        // odd n, odd t: channel 1+1/2 at t=1 is |1,L>
        assert_eq!(channel_to_vertex(n, 9, 1).unwrap(), (1, Chirality::L));
        // inverses
        assert_eq!(vertex_to_channel(n, 0, Chirality::R, 0).unwrap(), 7);
        assert_eq!(vertex_to_channel(n, 1, Chirality::L, 1).unwrap(), 9);
    }

    #[test]
    fn mapping_is_a_bijection_at_t0_and_t1() {
        let n = 12;
        for t in [0usize, 1, 2, 7] {
            let mut seen = vec![false; n];
            for slot in 0..n {
                let (pos, chir) = channel_to_vertex(n, slot, t).unwrap();
                assert_eq!(pos % 2, t % 2, "image respects the parity rule");
                let back = vertex_to_channel(n, pos, chir, t).unwrap();
                assert_eq!(back, slot);
                assert!(!seen[slot]);
                seen[slot] = true;
            }
        }
    }

    #[test]
    fn vertex_to_channel_rejects_wrong_parity() {
        assert!(matches!(
            vertex_to_channel(12, 1, Chirality::L, 0),
            Err(Error::OutsideParityImage { .. })
        ));
    }

    #[test]
    fn two_step_distribution_from_r_state() {
        // Frozen hand enumeration: from |0,R> the two-step position
        // distribution has P(-2) = 1/4 under the (R, L) coin convention.
        let n = 16;
        let mut state = VertexState::localized(n, 0, Chirality::R).unwrap();
        state = step_vertex(&state);
        state = step_vertex(&state);
        let probs = state.position_probabilities();
        let minus_two = (0i64 - 2).rem_euclid(n as i64) as usize;
        assert_abs_diff_eq!(probs[minus_two], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(probs[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(probs[2], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn first_channel_step_from_minus_half() {
        // δ on channel -1/2 spreads to equal-magnitude +1/√2 amplitudes on
        // channels ∓1/2 (signs fixed by the vertex-basis oracle).
        let n = 16;
        let mut state = ChannelState::localized(n, n / 2 - 1).unwrap();
        step_channel_in_place(&mut state);
        let amps = state.amplitudes();
        assert_abs_diff_eq!(amps[n / 2 - 1].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[n / 2].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        for (slot, a) in amps.iter().enumerate() {
            if slot != n / 2 - 1 && slot != n / 2 {
                assert_eq!(*a, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn pair_mix_is_an_involution() {
        // The Hadamard applied twice to a fixed (R, L) pair is the identity.
        let coin = CoinMatrix::hadamard();
        let a = Complex64::new(0.3, -0.4);
        let b = Complex64::new(-0.5, 0.7);
        let (r1, l1) = coin.apply(a, b);
        let (r2, l2) = coin.apply(r1, l1);
        assert_abs_diff_eq!((r2 - a).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((l2 - b).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn channel_step_matches_vertex_oracle() {
        // Central oracle: step_channel ≡ vertex_to_channel ∘ step_vertex ∘
        // channel_to_vertex, elementwise, over many steps and random states.
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut chan = random_channel_state(n, 0, &mut rng);
            let mut vert = to_vertex_state(&chan);
            for _ in 0..50 {
                step_channel_in_place(&mut chan);
                vert = step_vertex(&vert);
                let back = to_channel_state(&vert).unwrap();
                for (a, b) in chan.amplitudes().iter().zip(back.amplitudes()) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn steps_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let state = random_channel_state(32, 0, &mut rng);
            let stepped = step_channel(&state);
            assert_abs_diff_eq!(stepped.norm_sqr(), state.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn light_cone_zeros_are_exact() {
        let n = 64;
        let start = n / 2;
        let mut state = ChannelState::localized(n, start).unwrap();
        for t in 1..=(n / 2 - 1) {
            step_channel_in_place(&mut state);
            for (slot, a) in state.amplitudes().iter().enumerate() {
                let dist = (slot as i64 - start as i64).abs() as usize;
                if dist > t {
                    assert_eq!(*a, Complex64::new(0.0, 0.0), "t={t} slot={slot}");
                }
            }
        }
    }

    #[test]
    fn unperturbed_walk_is_asymmetric_and_matches_oracle() {
        let t_max = 100;
        let n = 2 * t_max + 16;
        let mut chan = ChannelState::localized(n, n / 2).unwrap();
        let mut vert = to_vertex_state(&chan);
        for _ in 0..t_max {
            step_channel_in_place(&mut chan);
            vert = step_vertex(&vert);
        }
        let back = to_channel_state(&vert).unwrap();
        for (a, b) in chan.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let probs = chan.probabilities();
        let left: f64 = probs[..n / 2].iter().sum();
        let right: f64 = probs[n / 2..].iter().sum();
        assert!(
            (left - right).abs() > 0.1,
            "Hadamard walk from a single channel must be asymmetric: L={left} R={right}"
        );
    }
}
