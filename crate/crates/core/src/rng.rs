//! Seeded randomness.
//!
//! Every randomized routine draws from a ChaCha8 stream addressed by
//! `(purpose, seed, index)`: the `(purpose, seed)` pair is mixed into the
//! 64-bit generator seed with SplitMix64 and `index` selects the ChaCha
//! stream. Codebook generation, encoder sampling and source sampling are
//! therefore reproducible independently of each other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::prob::Distribution;

pub type StreamRng = ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Purpose {
    Codebook = 1,
    Encoder = 2,
    Source = 3,
    Key = 4,
    Attack = 5,
    Channel = 6,
    Trial = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for `(purpose, seed, index)`.
pub fn stream(purpose: Purpose, seed: u64, index: u64) -> StreamRng {
    let mixed = splitmix64(seed ^ splitmix64(purpose as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF draw of one symbol.
pub fn sample<R: Rng + ?Sized>(dist: &Distribution, rng: &mut R) -> usize {
    sample_weights(dist.mass(), rng)
}

/// Draw an index proportionally to nonnegative `weights` (which need not be
/// normalized). Falls back to the last positive index on rounding overrun.
pub fn sample_weights<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}
