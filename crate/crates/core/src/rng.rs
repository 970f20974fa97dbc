//! Reproducible random sub-streams.
//!
//! Every draw comes from a ChaCha8 generator whose 256-bit key packs the
//! master seed, the sweep index, the phase and the redraw attempt, and whose
//! stream id is the entity (row or column) index. Draws therefore do not
//! depend on thread scheduling or on the order in which entities are visited.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub(crate) enum Phase {
    Init = 1,
    Rows = 2,
    ColumnsMu = 3,
    ColumnsSigma = 4,
    ColumnsTied = 5,
    Repair = 6,
    KMeans = 7,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn sweep(&self, sweep: u64, phase: Phase, attempt: u32) -> SweepStream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&sweep.to_le_bytes());
        key[16..20].copy_from_slice(&(phase as u32).to_le_bytes());
        key[20..24].copy_from_slice(&attempt.to_le_bytes());
        SweepStream {
            base: ChaCha8Rng::from_seed(key),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SweepStream {
    base: ChaCha8Rng,
}

impl SweepStream {
    pub fn entity(&self, index: usize) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index as u64);
        rng.set_word_pos(0);
        rng
    }

    /// One uniform in `[0, 1)` for `index`.
    pub fn uniform(&self, index: usize) -> f64 {
        to_unit(self.entity(index).next_u64())
    }
}

#[inline]
pub(crate) fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derives an independent 64-bit seed from a master seed and a tuple of words.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    for (k, w) in words.iter().take(3).enumerate() {
        key[8 + 8 * k..16 + 8 * k].copy_from_slice(&w.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(words.len() as u64 + 0x5eed);
    rng.next_u64()
}

/// Inverse-CDF draw from normalised probabilities given one uniform.
pub(crate) fn sample_categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Normalises log-weights in place with max-subtraction. Returns false when
/// no weight is finite.
pub(crate) fn normalize_log_weights(w: &mut [f64]) -> bool {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return false;
    }
    let mut sum = 0.0;
    for v in w.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in w.iter_mut() {
        *v /= sum;
    }
    true
}
