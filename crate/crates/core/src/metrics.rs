//! Signal-to-noise figures in decibels.
//!
//! Degenerate ratios are reported as infinities rather than errors: a perfect
//! reconstruction has `+inf` ISNR/SNR, and a constant blurred image has
//! `-inf` BSNR.

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub bsnr_db: f64,
    pub isnr_db: f64,
    pub snr_db: f64,
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if num == den {
        0.0
    } else {
        10.0 * (num / den).log10()
    }
}

/// Blurred-signal-to-noise ratio of a noiseless blurred image `z_tilde`
/// under additive noise of standard deviation `sigma`. The expectation is
/// taken as the spatial mean.
pub fn bsnr(z_tilde: &Image, sigma: f64) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::Argument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let var = centered_energy(z_tilde);
    let n = z_tilde.len() as f64;
    if var == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (var / (n * sigma * sigma)).log10())
}

/// `|z_tilde - mean(z_tilde)|^2`
pub fn centered_energy(z_tilde: &Image) -> f64 {
    let m = z_tilde.mean();
    z_tilde.data().iter().map(|v| (v - m) * (v - m)).sum()
}

/// BSNR realised by a particular noisy observation `z` of `z_tilde`.
pub fn empirical_bsnr(z_tilde: &Image, z: &Image) -> Result<f64> {
    z_tilde.ensure_same_shape(z)?;
    let noise = z.dist_sq(z_tilde);
    Ok(ratio_db(centered_energy(z_tilde), noise))
}

/// Improvement in SNR of `w_rec` over the degraded `z`, both measured
/// against `w_orig`.
pub fn isnr(z: &Image, w_rec: &Image, w_orig: &Image) -> Result<f64> {
    w_orig.ensure_same_shape(z)?;
    w_orig.ensure_same_shape(w_rec)?;
    Ok(ratio_db(z.dist_sq(w_orig), w_rec.dist_sq(w_orig)))
}

/// Signal energy of `w_orig` over the reconstruction error energy.
pub fn snr(w_rec: &Image, w_orig: &Image) -> Result<f64> {
    w_orig.ensure_same_shape(w_rec)?;
    Ok(ratio_db(w_orig.norm_sq(), w_rec.dist_sq(w_orig)))
}

/// Gathers all three figures. `sigma` is the noise level used to synthesise
/// `z`; when unknown, the BSNR is estimated from `z - z_tilde`.
pub fn quality_report(
    z_tilde: &Image,
    sigma: Option<f64>,
    z: &Image,
    w_rec: &Image,
    w_orig: &Image,
) -> Result<QualityReport> {
    let bsnr_db = match sigma {
        Some(s) => bsnr(z_tilde, s)?,
        None => empirical_bsnr(z_tilde, z)?,
    };
    Ok(QualityReport {
        bsnr_db,
        isnr_db: isnr(z, w_rec, w_orig)?,
        snr_db: snr(w_rec, w_orig)?,
    })
}
