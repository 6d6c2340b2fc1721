//! Deterministic, platform-independent pseudo-random source for matrix
//! initialization.
//!
//! The generator is SplitMix64:
//!
//! ```text
//! state = state + 0x9E37_79B9_7F4A_7C15        (wrapping)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9  (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB  (wrapping)
//! return z ^ (z >> 31)
//! ```
//!
//! with the initial state equal to the user seed. A float in `[0, 1)` is
//! formed from the top 24 bits of each output word divided by 2^24, so
//! every sample is exactly representable as an `f32`.

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform sample in `[0, 1)` with 24 bits of resolution.
    pub fn next_unit_f32(&mut self) -> f32 {
        const SCALE: f32 = 1.0 / (1u32 << 24) as f32;
        (self.next_u64() >> 40) as f32 * SCALE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // First four words for seed 7, computed with an independent Python
    // implementation of the recurrence above.
    const SEED7_WORDS: [u64; 4] = [
        0x63cb_e1e4_5932_0dd7,
        0x044c_3cd7_f43c_661c,
        0xe698_4080_bab1_2a02,
        0x953a_eb70_673e_29cb,
    ];

    #[test]
    fn seed7_stream_matches_reference_words() {
        let mut rng = SplitMix64::new(7);
        for want in SEED7_WORDS {
            assert_eq!(rng.next_u64(), want);
        }
    }

    #[test]
    fn unit_floats_use_top_24_bits() {
        let mut rng = SplitMix64::new(7);
        let got: Vec<f32> = (0..4).map(|_| rng.next_unit_f32()).collect();
        let want: Vec<f32> = SEED7_WORDS
            .iter()
            .map(|w| (w >> 40) as f32 / 16_777_216.0)
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn extremes_stay_below_one() {
        // Largest 24-bit mantissa maps to 1 - 2^-24, still < 1.
        let top = ((1u64 << 24) - 1) as f32 / 16_777_216.0;
        assert!(top < 1.0);
    }
}
