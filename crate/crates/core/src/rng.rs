//! Counter-addressed random streams.
//!
//! Every random draw made by an optimizer is addressed by `(seed, t, index)`:
//! the seed selects the ChaCha key, the iteration selects the ChaCha stream and
//! the sample index selects a disjoint window of the keystream. Draw `i` at step
//! `t` is therefore independent of how many other draws were consumed, of the
//! batch size, and of the order in which samples are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sample index reserved for the Gaussian privacy noise of DP-SGD.
pub const NOISE_INDEX: u64 = 1 << 35;

/// Words of keystream reserved for each sample index.
const WINDOW_BITS: u32 = 32;

#[derive(Clone, Debug)]
pub struct StreamRng {
    base: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        StreamRng {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator positioned at the start of window `index` of stream `t`.
    pub fn at(&self, t: u64, index: u64) -> ChaCha8Rng {
        debug_assert!(index <= NOISE_INDEX);
        let mut rng = self.base.clone();
        rng.set_stream(t);
        rng.set_word_pos(u128::from(index) << WINDOW_BITS);
        rng
    }
}
