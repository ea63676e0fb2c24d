//! Deterministic random streams.
//!
//! Every stochastic routine draws from a stream keyed by the master seed and a
//! short path of indices (level, chunk, ...). Work is split into fixed-size
//! chunks before it is handed to rayon, so results do not depend on how many
//! worker threads execute the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Trials per deterministic work unit.
pub const CHUNK: u64 = 4096;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream for `(seed, path...)`.
pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    let mut h = splitmix(seed);
    for &p in path {
        h = splitmix(h ^ splitmix(p.wrapping_add(0xA076_1D64_78BD_642F)));
    }
    let mut key = [0u8; 32];
    let mut s = h;
    for word in key.chunks_exact_mut(8) {
        s = splitmix(s);
        word.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Splits `trials` into `(chunk index, size)` pairs of at most [`CHUNK`].
pub fn chunks(trials: u64) -> Vec<(u64, u64)> {
    let n = trials.div_ceil(CHUNK);
    (0..n)
        .map(|i| (i, CHUNK.min(trials - i * CHUNK)))
        .collect()
}
