//! Counter-based splittable random number generation.
//!
//! Every sampler in the crate is keyed by `(seed, stream id, trial index)`.
//! The generator is a pure function of its key and counter, so a trial
//! produces the same numbers no matter which thread runs it or in which
//! order trials are scheduled. This is what makes experiment reports
//! byte-identical across worker counts.

use rand::RngCore;

/// 64-bit experiment seed.
pub type Seed = u64;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer; good avalanche, cheap.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based generator: `output(n) = mix(key + n*GOLDEN)`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    ctr: u64,
}

impl CounterRng {
    pub fn new(seed: Seed) -> Self {
        CounterRng { key: mix(seed), ctr: 0 }
    }

    /// Generator for a named stream of an experiment trial.
    pub fn stream(seed: Seed, stream_id: u64, trial: u64) -> Self {
        let key = mix(mix(mix(seed) ^ stream_id.wrapping_mul(GOLDEN)) ^ trial.wrapping_mul(GOLDEN));
        CounterRng { key, ctr: 0 }
    }

    /// Derive an independent child generator; the parent is unaffected.
    pub fn substream(&self, tag: u64) -> Self {
        CounterRng {
            key: mix(self.key ^ tag.wrapping_mul(GOLDEN) ^ 0x5851_f42d_4c95_7f2d),
            ctr: 0,
        }
    }

    #[inline]
    pub fn next_raw(&mut self) -> u64 {
        let out = mix(self.key.wrapping_add(self.ctr.wrapping_mul(GOLDEN)));
        self.ctr = self.ctr.wrapping_add(1);
        out
    }

    /// Uniform in [0, 1) with 53 bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_raw() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in (0, 1]; safe to take logarithms of.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_raw() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via the ziggurat in `rand_distr`.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        rand::Rng::sample(self, rand_distr::StandardNormal)
    }

    /// Poisson count with the given mean.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let d = rand_distr::Poisson::new(mean).expect("positive finite mean");
        rand::Rng::sample(self, d) as u64
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_raw() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.next_raw()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_raw().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
