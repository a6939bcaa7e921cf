//! Seeded, splittable random streams and the chunked parallel Monte Carlo
//! driver used by every stochastic estimator.
//!
//! A [`RngStream`] is a (master seed, stream id) pair. Work is cut into fixed
//! chunks of [`CHUNK`] samples; chunk `c` draws from ChaCha8 keyed by the
//! seed, on the stream id, starting at word offset `c << 36`. Chunk results
//! are merged in chunk order, so output depends only on the seed, stream and
//! sample count, never on the thread count.

use crate::numeric::{Estimate, MomentAccumulator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Samples per parallel work unit.
pub const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// An independent stream labelled by `tag`.
    pub fn derive(&self, tag: u64) -> RngStream {
        RngStream { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(tag.wrapping_add(1))) }
    }

    /// Generator for substream `index` of this stream.
    pub fn substream(&self, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos((index as u128) << 36);
        rng
    }

    pub fn rng(&self) -> StreamRng {
        self.substream(0)
    }
}

/// Parallel Monte Carlo means of `N` simultaneous estimands.
pub fn mc_estimate<const N: usize, F>(n: usize, stream: RngStream, f: F) -> [Estimate; N]
where
    F: Fn(&mut StreamRng) -> [f64; N] + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<[MomentAccumulator; N]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.substream(c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            let mut acc = [MomentAccumulator::default(); N];
            for _ in 0..count {
                let v = f(&mut rng);
                for (a, x) in acc.iter_mut().zip(v) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = [MomentAccumulator::default(); N];
    for p in &parts {
        for (t, a) in total.iter_mut().zip(p) {
            t.merge(a);
        }
    }
    total.map(|a| a.estimate())
}

/// Single-estimand convenience wrapper over [`mc_estimate`].
pub fn mc_mean<F>(n: usize, stream: RngStream, f: F) -> Estimate
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    mc_estimate::<1, _>(n, stream, |r| [f(r)])[0]
}
