//! Per-path random streams.
//!
//! Every Monte Carlo path `i` of a run seeded with `seed` draws from its own
//! ChaCha stream, so results do not depend on how paths are scheduled over
//! threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type PathRng = ChaCha8Rng;

pub fn path_rng(seed: u64, index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws a run seed from an existing generator.
pub fn derive_seed<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    rng.next_u64()
}

/// Maps `f` over path indices `0..count` in parallel, each call receiving the
/// path's own stream. Output order follows the index.
pub fn map_paths<T, F>(count: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut PathRng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}
