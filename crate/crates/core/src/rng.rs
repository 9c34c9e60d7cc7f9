//! Seeded random streams.
//!
//! Every stochastic step draws from its own named stream derived from the run
//! seed, so adding randomness to one stage never shifts another. The stream
//! key is the first 32 bytes of `SHA-256("styloverify/" || seed_le || "/" || name)`
//! and the generator is ChaCha8.
//!
//! Stream names in use:
//!
//! | name                 | stage                                          |
//! |----------------------|------------------------------------------------|
//! | `pairs.split`        | construction / held-out document partition     |
//! | `pairs.construction` | construction pair sampling                     |
//! | `pairs.holdout`      | held-out pair sampling                         |
//! | `imitation.sample`   | choice of source documents for imitation runs  |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const PAIRS_SPLIT: &str = "pairs.split";
pub const PAIRS_CONSTRUCTION: &str = "pairs.construction";
pub const PAIRS_HOLDOUT: &str = "pairs.holdout";
pub const IMITATION_SAMPLE: &str = "imitation.sample";

pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"styloverify/");
    hasher.update(seed.to_le_bytes());
    hasher.update(b"/");
    hasher.update(name.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(key)
}
