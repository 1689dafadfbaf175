//! Keyed random streams.
//!
//! Every random draw in a Monte Carlo run comes from a ChaCha8 stream keyed by
//! `(master seed, replication index, role)`. ChaCha is counter based, so a
//! stream can be opened independently of every other one and the output of a
//! replication never depends on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamRole {
    Data = 0,
    Weights = 1,
    Bootstrap = 2,
    Aux = 3,
}

/// Identifies one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub replication: u64,
    pub role: StreamRole,
}

impl SeedRecord {
    pub fn new(master: u64, replication: u64, role: StreamRole) -> Self {
        Self {
            master,
            replication,
            role,
        }
    }

    pub fn rng(&self) -> SimRng {
        stream(self.master, self.replication, self.role)
    }
}

pub fn stream(master: u64, replication: u64, role: StreamRole) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(replication.wrapping_mul(4).wrapping_add(role as u64));
    rng
}

/// Independent sub-stream `index` within a keyed stream, for consumers that
/// must not shift each other's draws.
pub fn substream(master: u64, replication: u64, role: StreamRole, index: u64) -> SimRng {
    let mut rng = stream(master, replication, role);
    rng.set_word_pos((index as u128) << 48);
    rng
}
