//! Seeded random streams.
//!
//! Every chain draws from `ChaCha12Rng` keyed by the user seed. Independent
//! streams are selected with `set_stream(replica * CHANNELS + channel)`, so a
//! replica's draws depend only on `(seed, replica, channel)` and never on
//! scheduling or thread count.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Injected diffusion noise ξ.
pub const DIFFUSION: u64 = 0;
/// Gradient-oracle randomness: ζ draws or minibatch indices.
pub const ORACLE: u64 = 1;
/// Draws of a random initial point.
pub const INITIAL: u64 = 2;

const CHANNELS: u64 = 4;

pub type StreamRng = ChaCha12Rng;

pub fn stream(seed: u64, replica: u64, channel: u64) -> StreamRng {
    debug_assert!(channel < CHANNELS);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replica.wrapping_mul(CHANNELS).wrapping_add(channel));
    rng
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn rademacher<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_iterator(
        dim,
        (0..dim).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }),
    )
}
