//! Row-action projections onto the measurement sets
//! `{w : (w * h)[i] = z_i}` and their slab relaxations
//! `{w : |(w * h)[i] - z_i| <= eps}`.
//!
//! Every update divides by the squared norm of the kernel taps that land
//! inside the image at pixel `i`, so each row action is an exact orthogonal
//! projection, including at the borders.

use crate::error::{Error, Result};
use crate::image::{convolve_full, response_at, Image, Kernel};

#[derive(Debug, Clone)]
pub struct MeasurementModel {
    pub z: Image,
    pub h: Kernel,
    /// Half-width of the measurement slabs; `None` means hyperplanes.
    pub slab_eps: Option<f64>,
}

impl MeasurementModel {
    pub fn new(z: Image, h: Kernel, slab_eps: Option<f64>) -> Result<Self> {
        z.ensure_finite()?;
        if let Some(e) = slab_eps {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::Config(format!(
                    "slab half-width must be >= 0, got {e}"
                )));
            }
        }
        Ok(Self { z, h, slab_eps })
    }

    pub fn hyperplanes(z: Image, h: Kernel) -> Result<Self> {
        Self::new(z, h, None)
    }

    /// `z - v * h`.
    pub fn residual(&self, v: &Image) -> Result<Image> {
        self.z.ensure_same_shape(v)?;
        Ok(self.z.sub(&convolve_full(v, &self.h)))
    }

    pub fn residual_norm(&self, v: &Image) -> Result<f64> {
        Ok(self.residual(v)?.norm())
    }

    fn check(&self, v: &Image, (x, y): (usize, usize)) -> Result<()> {
        self.z.ensure_same_shape(v)?;
        if x >= v.width() || y >= v.height() {
            return Err(Error::Index {
                x,
                y,
                width: v.width(),
                height: v.height(),
            });
        }
        Ok(())
    }
}

/// Moves `data` onto `{(w * h)[i] = target}` in place.
#[inline]
fn project_in_place(
    data: &mut [f64],
    width: usize,
    height: usize,
    h: &Kernel,
    (x, y): (usize, usize),
    target: f64,
    band: f64,
) -> Result<()> {
    let r = target - response_at(data, width, height, h, x, y);
    let excess = if r > band {
        r - band
    } else if r < -band {
        r + band
    } else {
        return Ok(());
    };
    let norm = h.effective_sq_norm(width, height, x, y);
    if norm <= 0.0 {
        return Err(Error::Numeric(format!(
            "kernel has no support inside the image at ({x}, {y})"
        )));
    }
    let c = excess / norm;
    h.for_each_stamped(width, height, x, y, |i, t| data[i] += c * t);
    Ok(())
}

/// Projection onto the measurement hyperplane of pixel `i = (x, y)`.
pub fn project_row(v: &Image, m: &MeasurementModel, i: (usize, usize)) -> Result<Image> {
    m.check(v, i)?;
    let mut out = v.clone();
    let (w, h) = v.shape();
    project_in_place(out.data_mut(), w, h, &m.h, i, m.z.get(i.0, i.1), 0.0)?;
    Ok(out)
}

/// Projection onto the measurement slab of pixel `i`.
pub fn project_slab(v: &Image, m: &MeasurementModel, i: (usize, usize)) -> Result<Image> {
    let band = m
        .slab_eps
        .ok_or_else(|| Error::Config("slab projection needs a slab half-width".into()))?;
    m.check(v, i)?;
    let mut out = v.clone();
    let (w, h) = v.shape();
    project_in_place(out.data_mut(), w, h, &m.h, i, m.z.get(i.0, i.1), band)?;
    Ok(out)
}

/// One Gauss-Seidel pass of row projections over every pixel in row-major
/// order. Uses slabs when the model carries a half-width.
pub fn sweep(v: &Image, m: &MeasurementModel) -> Result<Image> {
    m.z.ensure_same_shape(v)?;
    let band = m.slab_eps.unwrap_or(0.0);
    let (w, h) = v.shape();
    let mut out = v.clone();
    let data = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            project_in_place(data, w, h, &m.h, (x, y), m.z.get(x, y), band)?;
        }
    }
    out.ensure_finite()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::convolve_at;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
        Image::new(
            w,
            h,
            (0..w * h).map(|_| rng.gen_range(-50.0..50.0)).collect(),
        )
        .unwrap()
    }

    fn random_kernel(rng: &mut ChaCha8Rng) -> Kernel {
        Kernel::new(3, (0..9).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn delta_kernel_sets_pixel() {
        let z = Image::from_rows(&[&[3.0, 7.0], &[1.0, 1.0]]).unwrap();
        let v = Image::from_rows(&[&[1.0, 2.0], &[5.0, 6.0]]).unwrap();
        let m = MeasurementModel::hyperplanes(z, Kernel::delta()).unwrap();
        let out = project_row(&v, &m, (0, 0)).unwrap();
        assert_eq!(out.data(), &[3.0, 2.0, 5.0, 6.0]);
    }

    #[test]
    fn point_on_hyperplane_is_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_image(&mut rng, 5, 4);
        let k = random_kernel(&mut rng);
        let m = MeasurementModel::hyperplanes(convolve_full(&v, &k), k).unwrap();
        let out = project_row(&v, &m, (2, 1)).unwrap();
        for (a, b) in out.data().iter().zip(v.data()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn truncated_norm_at_border() {
        let v = Image::zeros(2, 1).unwrap();
        let z = Image::from_signal(&[1.0, 0.0]).unwrap();
        let k = Kernel::new(3, vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(k.effective_sq_norm(2, 1, 0, 0), 0.5);
        let m = MeasurementModel::hyperplanes(z, k.clone()).unwrap();
        let out = project_row(&v, &m, (0, 0)).unwrap();
        assert_eq!(out.data(), &[1.0, 1.0]);
        assert_relative_eq!(convolve_at(&out, &k, 0, 0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn row_projection_is_exact_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v = random_image(&mut rng, 6, 5);
            let k = random_kernel(&mut rng);
            let z = random_image(&mut rng, 6, 5);
            let m = MeasurementModel::hyperplanes(z.clone(), k.clone()).unwrap();
            let i = (rng.gen_range(0..6), rng.gen_range(0..5));
            let out = project_row(&v, &m, i).unwrap();
            let zi = z.get(i.0, i.1);
            let res = (zi - convolve_at(&out, &k, i.0, i.1).unwrap()).abs();
            assert!(res <= 1e-9 * (1.0 + zi.abs()));

            // the step is parallel to the stamped kernel row
            let mut row = Image::zeros(6, 5).unwrap();
            k.for_each_stamped(6, 5, i.0, i.1, |j, t| row.data_mut()[j] = t);
            let step = out.sub(&v);
            if step.norm() > 1e-12 {
                let cos = step.dot(&row) / (step.norm() * row.norm());
                assert!(cos.abs() >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn slab_projection() {
        let k = Kernel::new(3, vec![0.1, 0.2, 0.1, 0.2, 0.4, 0.2, 0.1, 0.2, 0.1]).unwrap();
        let v = Image::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]).unwrap();
        let exact = convolve_full(&v, &k);
        let m = MeasurementModel::new(exact.clone(), k.clone(), Some(0.5)).unwrap();
        assert_eq!(project_slab(&v, &m, (1, 1)).unwrap(), v);

        let zero = MeasurementModel::new(
            exact.add_scaled(1.0, &Image::filled(3, 3, 1.0).unwrap()),
            k.clone(),
            Some(0.0),
        )
        .unwrap();
        let plane = MeasurementModel::hyperplanes(zero.z.clone(), k.clone()).unwrap();
        assert_eq!(
            project_slab(&v, &zero, (2, 0)).unwrap(),
            project_row(&v, &plane, (2, 0)).unwrap()
        );

        let eps = 0.25;
        for sign in [1.0, -1.0] {
            let z = exact.add_scaled(sign * 2.0 * eps, &Image::filled(3, 3, 1.0).unwrap());
            let m = MeasurementModel::new(z.clone(), k.clone(), Some(eps)).unwrap();
            let out = project_slab(&v, &m, (0, 2)).unwrap();
            let r = z.get(0, 2) - convolve_at(&out, &k, 0, 2).unwrap();
            assert_relative_eq!(r, sign * eps, epsilon = 1e-9);
        }

        let no_slab = MeasurementModel::hyperplanes(exact, k).unwrap();
        assert!(matches!(
            project_slab(&v, &no_slab, (0, 0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn negative_slab_rejected() {
        let z = Image::zeros(2, 2).unwrap();
        assert!(MeasurementModel::new(z, Kernel::delta(), Some(-1.0)).is_err());
    }

    #[test]
    fn out_of_range_pixel() {
        let z = Image::zeros(2, 2).unwrap();
        let m = MeasurementModel::hyperplanes(z.clone(), Kernel::delta()).unwrap();
        assert!(matches!(
            project_row(&z, &m, (2, 0)),
            Err(Error::Index { .. })
        ));
        let wrong = Image::zeros(3, 2).unwrap();
        assert!(matches!(sweep(&wrong, &m), Err(Error::Shape { .. })));
    }

    #[test]
    fn delta_sweep_reproduces_observation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = random_image(&mut rng, 7, 3);
        let v = random_image(&mut rng, 7, 3);
        let m = MeasurementModel::hyperplanes(z.clone(), Kernel::delta()).unwrap();
        assert_eq!(sweep(&v, &m).unwrap(), z);
    }

    #[test]
    fn consistent_sweep_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = random_image(&mut rng, 8, 8);
        let k = random_kernel(&mut rng);
        let m = MeasurementModel::hyperplanes(convolve_full(&w, &k), k).unwrap();
        let out = sweep(&w, &m).unwrap();
        for (a, b) in out.data().iter().zip(w.data()) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn sweep_reduces_residual_on_random_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let k = Kernel::boxcar(3).unwrap();
        for _ in 0..20 {
            let truth = random_image(&mut rng, 8, 8);
            let m = MeasurementModel::hyperplanes(convolve_full(&truth, &k), k.clone()).unwrap();
            let v = random_image(&mut rng, 8, 8);
            let before = m.residual(&v).unwrap().norm_sq();
            let after = m.residual(&sweep(&v, &m).unwrap()).unwrap().norm_sq();
            assert!(after < before, "{after} >= {before}");
        }
    }

    #[test]
    fn fejer_monotone_towards_consistent_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..20 {
            let truth = random_image(&mut rng, 8, 8);
            let k = random_kernel(&mut rng);
            let m = MeasurementModel::hyperplanes(convolve_full(&truth, &k), k).unwrap();
            let mut v = random_image(&mut rng, 8, 8);
            for y in 0..8 {
                for x in 0..8 {
                    let next = project_row(&v, &m, (x, y)).unwrap();
                    assert!(next.dist_sq(&truth).sqrt() <= v.dist_sq(&truth).sqrt() + 1e-9);
                    v = next;
                }
            }
        }
    }
}
