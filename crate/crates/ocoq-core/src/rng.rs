//! Counter-based pseudo-randomness.
//!
//! Scenario generators need the draw for slot `t` to be a pure function of
//! `(seed, t)` so any slot can be regenerated in isolation and two processes
//! with the same spec produce identical streams. The generator here keys a
//! SplitMix64 sequence off a mix of `(seed, counter, stream)`; all operations
//! are integer arithmetic, so outputs are bit-identical across platforms.

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent seed from a master seed and an index.
///
/// For a fixed master seed the map `index → seed` is injective: the inner
/// combination is a bijection of the index and `mix` is itself a bijection
/// on `u64`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(master ^ index.wrapping_add(1).wrapping_mul(GAMMA))
}

/// A deterministic generator positioned at a `(seed, counter, stream)` cell.
#[derive(Debug, Clone)]
pub struct SlotRng {
    state: u64,
}

impl SlotRng {
    /// Generator for draw cell `(seed, counter, stream)`.
    pub fn at(seed: u64, counter: u64, stream: u64) -> Self {
        let a = mix(seed ^ counter.wrapping_mul(GAMMA));
        let b = mix(a ^ stream.wrapping_add(1).wrapping_mul(0xc2b2_ae3d_27d4_eb4f));
        SlotRng { state: b }
    }

    /// Plain seeded generator (counter 0, stream 0).
    pub fn seeded(seed: u64) -> Self {
        Self::at(seed, 0, 0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
