//! Synthetic degradations `z = w_orig * h + noise` with the Gaussian noise
//! level chosen to hit a target BSNR.
//!
//! Noise comes from a ChaCha20 stream seeded with `seed`, so a given seed
//! produces the same bytes on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::image::{convolve_full, Image, Kernel};
use crate::metrics::centered_energy;

#[derive(Debug, Clone)]
pub struct DegradationSpec {
    pub kernel: Kernel,
    /// `f64::INFINITY` means noiseless.
    pub target_bsnr_db: f64,
    pub seed: u64,
}

/// Noise standard deviation that gives `z_tilde` the requested BSNR.
pub fn calibrate_sigma(z_tilde: &Image, target_bsnr_db: f64) -> Result<f64> {
    if target_bsnr_db.is_nan() || target_bsnr_db == f64::NEG_INFINITY {
        return Err(Error::Argument(format!(
            "target BSNR must be finite or +inf, got {target_bsnr_db}"
        )));
    }
    if target_bsnr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let energy = centered_energy(z_tilde);
    if energy == 0.0 {
        return Err(Error::Degenerate(
            "blurred image is constant; BSNR is undefined".into(),
        ));
    }
    let n = z_tilde.len() as f64;
    Ok((energy / (n * 10f64.powf(target_bsnr_db / 10.0))).sqrt())
}

/// Standard normal deviates from a seeded ChaCha20 stream.
pub struct GaussianNoise {
    rng: ChaCha20Rng,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Blurs `w_orig` and adds calibrated white Gaussian noise. Returns the
/// observation and the noise standard deviation used.
pub fn degrade(w_orig: &Image, spec: &DegradationSpec) -> Result<(Image, f64)> {
    let z_tilde = convolve_full(w_orig, &spec.kernel);
    let sigma = calibrate_sigma(&z_tilde, spec.target_bsnr_db)?;
    if sigma == 0.0 {
        return Ok((z_tilde, 0.0));
    }
    let mut noise = GaussianNoise::new(spec.seed);
    let z = z_tilde.map(|v| v + sigma * noise.sample());
    Ok((z, sigma))
}
