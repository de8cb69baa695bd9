//! Value types shared by every stage: images, blur kernels, lifted vectors,
//! and zero-padded 2D filtering.
//!
//! Kernels are applied without flipping: tap `(dy, dx)` (offsets measured
//! from the kernel centre) weights the pixel at `(x + dx, y + dy)`. For the
//! symmetric point-spread functions used in deblurring this coincides with
//! convolution. Neighbours outside the image contribute zero.

use crate::error::{Error, Result};

/// A single-channel image of real intensities stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Argument(format!(
                "{width}x{height} image needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0.0)
    }

    /// A `1 x n` image holding a flat signal.
    pub fn from_signal(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// Builds an image from rows of equal length.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Argument("ragged rows".into()));
        }
        Self::new(width, height, rows.concat())
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn ensure_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                expected: self.shape(),
                actual: other.shape(),
            });
        }
        Ok(())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::Numeric(format!("non-finite sample at index {i}"))),
            None => Ok(()),
        }
    }

    pub fn dot(&self, other: &Image) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Squared Euclidean distance to an image of the same shape.
    pub fn dist_sq(&self, other: &Image) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> Image {
        self.map(|v| c * v)
    }

    /// `self + c * other`
    pub fn add_scaled(&self, c: f64, other: &Image) -> Image {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Image::from_raw(self.width, self.height, data)
    }

    pub fn sub(&self, other: &Image) -> Image {
        self.add_scaled(-1.0, other)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A square, odd-sized blur kernel anchored at its centre tap.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    taps: Vec<f64>,
    sq_norm: f64,
}

impl Kernel {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::Kernel(format!(
                "kernel size must be odd and positive, got {size}"
            )));
        }
        if taps.len() != size * size {
            return Err(Error::Kernel(format!(
                "kernel of size {size} needs {} taps, got {}",
                size * size,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Kernel("kernel taps must be finite".into()));
        }
        let sq_norm = dot(&taps, &taps);
        if sq_norm <= 0.0 {
            return Err(Error::Kernel(
                "kernel must have nonzero norm (all taps are zero)".into(),
            ));
        }
        Ok(Self {
            size,
            taps,
            sq_norm,
        })
    }

    /// The 1x1 identity kernel.
    pub fn delta() -> Self {
        Self::new(1, vec![1.0]).expect("valid kernel")
    }

    /// A uniform `size x size` averaging kernel.
    pub fn boxcar(size: usize) -> Result<Self> {
        let n = size * size;
        Self::new(size, vec![1.0 / n as f64; n])
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sq_norm(&self) -> f64 {
        self.sq_norm
    }

    /// Tap at row `ky`, column `kx` of the kernel grid.
    #[inline]
    pub fn tap(&self, kx: usize, ky: usize) -> f64 {
        self.taps[ky * self.size + kx]
    }

    pub fn tap_sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Visits every tap whose stamped pixel lies inside a `width x height`
    /// image when the kernel is centred on `(x, y)`. The callback receives the
    /// flat pixel index and the tap value.
    #[inline]
    pub(crate) fn for_each_stamped(
        &self,
        width: usize,
        height: usize,
        x: usize,
        y: usize,
        mut f: impl FnMut(usize, f64),
    ) {
        let r = self.radius();
        let y0 = y.saturating_sub(r);
        let y1 = (y + r).min(height - 1);
        let x0 = x.saturating_sub(r);
        let x1 = (x + r).min(width - 1);
        for py in y0..=y1 {
            let ky = py + r - y;
            let row = py * width;
            for px in x0..=x1 {
                let kx = px + r - x;
                f(row + px, self.taps[ky * self.size + kx]);
            }
        }
    }

    /// Squared norm of the taps that land inside the image at `(x, y)`.
    pub fn effective_sq_norm(&self, width: usize, height: usize, x: usize, y: usize) -> f64 {
        let mut acc = 0.0;
        self.for_each_stamped(width, height, x, y, |_, t| acc += t * t);
        acc
    }
}

/// A point `(w, y)` of the lifted space: an image plus one extra coordinate
/// measured in cost units.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVector {
    pub w: Image,
    pub y: f64,
}

impl LiftedVector {
    pub fn distance(&self, other: &LiftedVector) -> f64 {
        (self.w.dist_sq(&other.w) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn into_image(self) -> Image {
        self.w
    }
}

/// Embeds an image in the lifted space at height `y`.
pub fn lift(img: &Image, y: f64) -> Result<LiftedVector> {
    if !y.is_finite() {
        return Err(Error::Argument(format!(
            "lift height must be finite, got {y}"
        )));
    }
    Ok(LiftedVector { w: img.clone(), y })
}

/// Filter response at pixel `(x, y)` with zero padding.
pub fn convolve_at(img: &Image, k: &Kernel, x: usize, y: usize) -> Result<f64> {
    if x >= img.width() || y >= img.height() {
        return Err(Error::Index {
            x,
            y,
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(response_at(img.data(), img.width(), img.height(), k, x, y))
}

#[inline]
pub(crate) fn response_at(
    data: &[f64],
    width: usize,
    height: usize,
    k: &Kernel,
    x: usize,
    y: usize,
) -> f64 {
    let mut acc = 0.0;
    k.for_each_stamped(width, height, x, y, |i, t| acc += data[i] * t);
    acc
}

/// Filters the whole image; equal to [`convolve_at`] at every pixel.
pub fn convolve_full(img: &Image, k: &Kernel) -> Image {
    let (w, h) = img.shape();
    let mut out = Vec::with_capacity(img.len());
    for y in 0..h {
        for x in 0..w {
            out.push(response_at(img.data(), w, h, k, x, y));
        }
    }
    Image::from_raw(w, h, out)
}
