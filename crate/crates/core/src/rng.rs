//! Named random streams derived from a single experiment seed.
//!
//! Every consumer of randomness asks for a stream by name. Streams are
//! ChaCha8 generators keyed by the seed with the stream id taken from an
//! FNV-1a hash of the name, so adding or reordering consumers never shifts
//! another consumer's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(name: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in name.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Returns the generator for stream `name` under `seed`.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name));
    rng
}
