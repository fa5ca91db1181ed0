//! Seeded randomness.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed and a stream
//! index, so independent jobs (trials, restarts) get non-overlapping
//! sequences split deterministically from one seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::amplitude::Amplitude;

pub type EngineRng = ChaCha8Rng;

/// Generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> EngineRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Gaussian of scale `scale`, clipped radially to `|a| ≤ scale`.
pub fn clipped_amplitude<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Amplitude {
    let z = complex_gaussian(rng) * scale;
    let r = z.norm();
    if r > scale {
        (z * (scale / r)).into()
    } else {
        z.into()
    }
}

/// Uniformly distributed unit vector in `ℂ^dim`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}
