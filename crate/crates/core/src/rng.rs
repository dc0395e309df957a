use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent, reproducible stream `stream` of the generator seeded by `seed`.
///
/// Work items keyed by a stream id draw the same numbers regardless of the
/// order (or thread) in which they are evaluated.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
