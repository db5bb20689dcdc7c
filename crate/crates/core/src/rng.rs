//! Seeded, splittable uniform streams.
//!
//! Every stream is a ChaCha8 keystream keyed by the master seed and
//! positioned on its own 64-bit stream id, so distinct substreams never share
//! state and each one has room for 2^68 draws before wrapping.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Identifies one substream of a seeded experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSpec {
    pub master_seed: u64,
    pub substream_index: u64,
}

impl StreamSpec {
    pub fn new(master_seed: u64, substream_index: u64) -> Self {
        Self {
            master_seed,
            substream_index,
        }
    }
}

/// A generator of i.i.d. uniforms on the open interval (0, 1).
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

const INV_2_POW_52: f64 = 1.0 / (1u64 << 52) as f64;

impl UniformStream {
    /// Next uniform, strictly inside (0, 1).
    ///
    /// Uses the top 52 bits of a 64-bit word, offset by half a grid step, so
    /// the result lies in `[2^-53, 1 - 2^-53]`; both ends are exact doubles.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 12) as f64 + 0.5) * INV_2_POW_52
    }
}

pub fn make_stream(spec: StreamSpec) -> UniformStream {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(spec.substream_index);
    UniformStream { rng }
}

/// Bits of the substream index reserved for the replication number; the
/// remaining high bits carry the experiment cell ordinal.
pub const REPLICATION_BITS: u32 = 40;

/// Assigns one substream per replication within an experiment cell.
///
/// Replication `r` of cell `c` reads substream `(c << 40) | r`, so cells never
/// overlap and a replication's draws do not depend on how replications are
/// scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationStreams {
    pub master_seed: u64,
    pub cell: u32,
}

impl ReplicationStreams {
    pub fn new(master_seed: u64, cell: u32) -> Self {
        Self { master_seed, cell }
    }

    pub fn spec(&self, replication: u64) -> StreamSpec {
        debug_assert!(replication < (1u64 << REPLICATION_BITS));
        StreamSpec::new(
            self.master_seed,
            (u64::from(self.cell) << REPLICATION_BITS) | replication,
        )
    }

    pub fn stream(&self, replication: u64) -> UniformStream {
        make_stream(self.spec(replication))
    }
}
