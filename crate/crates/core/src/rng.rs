//! Reproducible random streams.
//!
//! Every chain owns a [`ChaCha8Rng`] keyed by the master seed and positioned on
//! the stream numbered by the chain index. Streams never overlap, so results do
//! not depend on how chains are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// The generator for chain `chain` under `master_seed`.
///
/// ```
/// use rand::Rng;
/// let mut a = slicelab::rng::stream(7, 3);
/// let mut b = slicelab::rng::stream(7, 3);
/// assert_eq!(a.random::<u64>(), b.random::<u64>());
/// ```
pub fn stream(master_seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(chain);
    rng
}
