//! Reproducible random streams.
//!
//! Every random sequence in the crate is addressed by a `(seed, stream id)`
//! pair. Streams with different ids are statistically independent, and the
//! same pair always regenerates the same sequence, which is what lets a
//! subtractive-dither decoder rebuild the encoder's dither.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Returns the generator for sub-stream `stream_id` of `seed`.
pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
