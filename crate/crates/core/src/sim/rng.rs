//! Splittable, counter-free random streams.
//!
//! Every trial gets its own ChaCha8 key derived from `(master_seed, trial)`,
//! and every protocol stage reads from its own ChaCha stream under that key.
//! Trial results therefore do not depend on scheduling or trial order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Protocol stage owning a random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    PrivateKey = 0,
    BobNullPort = 1,
    CharlieNullPort = 2,
    Forger = 3,
    BobVerification = 4,
    CharlieVerification = 5,
}

const DOMAIN_TAG: [u8; 16] = *b"qds-sim-stream-1";

pub fn stream_rng(master_seed: u64, trial: u64, stage: Stage) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&trial.to_le_bytes());
    seed[16..].copy_from_slice(&DOMAIN_TAG);
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stage as u64);
    rng
}
