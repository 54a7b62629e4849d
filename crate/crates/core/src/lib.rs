//! Numerical toolkit for Fourier multipliers supported in cones: cone
//! geometry, angular profiles on the sphere, symbol estimates, divergence
//! witnesses, an FFT multiplier engine and dyadic wave front estimation.

// `!(x > 0.0)` style checks reject NaN together with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone_geometry;
pub mod error;
pub mod io;
pub mod multiplier_engine;
pub mod quad;
pub mod sphere_profiles;
pub mod symbols;
pub mod wavefront;
pub mod witness;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator used wherever the toolkit samples.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
