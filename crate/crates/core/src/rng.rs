//! Reproducible random streams.
//!
//! All randomness in the crate comes from ChaCha8 keyed by a 64-bit seed
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`). ChaCha is a counter-based
//! generator with a portable, documented output stream, so a seed produces
//! bit-identical angle sequences on every platform. Independent replicas of a
//! Monte Carlo experiment use distinct ChaCha streams of the same key.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for replica `stream` of experiment `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform angle on `[0, 2pi)` from 53 random bits.
#[inline]
pub fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let theta = TAU * u;
    // TAU * u can round up to TAU for u close to 1.
    if theta >= TAU {
        0.0
    } else {
        theta
    }
}

/// The attachment angles Theta_1..Theta_n of a cluster grown with `seed`.
pub fn sample_thetas(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| uniform_angle(&mut rng)).collect()
}

/// Angle sequence for replica `stream` of a Monte Carlo run.
pub fn sample_thetas_stream(n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..n).map(|_| uniform_angle(&mut rng)).collect()
}
