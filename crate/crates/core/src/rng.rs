//! Counter-based random substreams.
//!
//! Every trial draws from streams keyed by `(master seed, role)` and indexed
//! by the trial number, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Channel = 1,
    Codeword = 2,
    Noise = 3,
    Dither = 4,
    Misc = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn substream(master_seed: u64, trial: u64, role: Role) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = splitmix64(master_seed ^ splitmix64(role as u64));
    for chunk in key.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
