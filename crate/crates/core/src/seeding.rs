//! Deterministic random streams.
//!
//! Every random consumer gets its own ChaCha8 stream: the 64-bit master
//! seed selects the key, and a [`StreamKey`] packed into the 64-bit ChaCha
//! stream id selects an independent keystream. Results therefore never
//! depend on how work is scheduled across threads.
//!
//! Stream id layout, most significant bits first:
//!
//! | bits | field |
//! |------|-------|
//! | 8  | purpose tag |
//! | 16 | motion length (0 when unused) |
//! | 4  | noise kind |
//! | 12 | ζ grid index |
//! | 24 | repetition / item index |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    SynthRestPose = 1,
    SynthClip = 2,
    NoiseCell = 3,
    DataSplit = 4,
    NoiseSpec = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub purpose: Purpose,
    pub length: u16,
    pub kind: u8,
    pub zeta_index: u16,
    pub index: u32,
}

impl StreamKey {
    pub fn new(purpose: Purpose) -> Self {
        StreamKey {
            purpose,
            length: 0,
            kind: 0,
            zeta_index: 0,
            index: 0,
        }
    }

    pub fn with_index(mut self, index: u32) -> Self {
        self.index = index;
        self
    }

    pub fn stream_id(&self) -> u64 {
        debug_assert!(self.kind < 16 && self.zeta_index < 4096 && self.index < (1 << 24));
        ((self.purpose as u64) << 56)
            | ((self.length as u64) << 40)
            | (((self.kind & 0xf) as u64) << 36)
            | (((self.zeta_index & 0xfff) as u64) << 24)
            | (self.index as u64 & 0xff_ffff)
    }
}

pub fn stream(master_seed: u64, key: StreamKey) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(key.stream_id());
    rng
}
