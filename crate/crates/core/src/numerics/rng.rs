//! Seeded, portable random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the 64-bit seed. Pipeline
//! stages draw from distinct ChaCha stream ids, and nested work (restarts,
//! repetitions) derives child seeds through SplitMix64, so the same seed
//! reproduces the same numbers on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids for the stages of a fit.
pub mod stage {
    pub const QUANTIZE: u64 = 1;
    pub const SPECTRAL: u64 = 2;
    pub const DATA: u64 = 3;
    pub const NOISE: u64 = 4;
    pub const EVAL: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngState {
    seed: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for one pipeline stage.
    pub fn stream(&self, stage: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stage);
        rng
    }

    /// State for a pipeline stage that needs its own nested streams.
    pub fn fork(&self, stage: u64) -> RngState {
        RngState { seed: splitmix64(self.seed.wrapping_add(stage.wrapping_mul(0xA076_1D64_78BD_642F))) }
    }

    /// Independent child state, e.g. for restart `index`.
    pub fn child(&self, index: u64) -> RngState {
        RngState { seed: splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x5EED))) }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
