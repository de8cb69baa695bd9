//! Convex, nonnegative cost functionals together with a subgradient selector.
//!
//! Every selector uses `sign(0) = 0` at kinks, so constant images are
//! stationary for total variation and the origin is stationary for the
//! norms.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::image::Image;

/// A convex functional `f >= 0` on images.
pub trait Cost {
    fn eval(&self, img: &Image) -> f64;

    /// One element of the subdifferential of [`Cost::eval`] at `img`.
    fn subgradient(&self, img: &Image) -> Image;
}

/// The built-in cost functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostKind {
    /// Anisotropic total variation with forward differences.
    Tv,
    L1,
    L2,
}

impl Cost for CostKind {
    fn eval(&self, img: &Image) -> f64 {
        match self {
            CostKind::Tv => tv_eval(img),
            CostKind::L1 => l1_eval(img),
            CostKind::L2 => l2_eval(img),
        }
    }

    fn subgradient(&self, img: &Image) -> Image {
        match self {
            CostKind::Tv => tv_subgradient(img),
            CostKind::L1 => l1_subgradient(img),
            CostKind::L2 => l2_subgradient(img),
        }
    }
}

impl CostKind {
    pub const ALL: [CostKind; 3] = [CostKind::Tv, CostKind::L1, CostKind::L2];

    pub fn name(&self) -> &'static str {
        match self {
            CostKind::Tv => "tv",
            CostKind::L1 => "l1",
            CostKind::L2 => "l2",
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tv" => Ok(CostKind::Tv),
            "l1" => Ok(CostKind::L1),
            "l2" => Ok(CostKind::L2),
            other => Err(Error::Argument(format!(
                "unknown cost '{other}', expected one of tv, l1, l2"
            ))),
        }
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sum of absolute forward differences along rows and columns. Differences
/// that would leave the image are dropped.
pub fn tv_eval(img: &Image) -> f64 {
    let (w, h) = img.shape();
    let d = img.data();
    let mut acc = 0.0;
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let c = d[row + x];
            if x + 1 < w {
                acc += (d[row + x + 1] - c).abs();
            }
            if y + 1 < h {
                acc += (d[row + w + x] - c).abs();
            }
        }
    }
    acc
}

pub fn tv_subgradient(img: &Image) -> Image {
    let (w, h) = img.shape();
    let d = img.data();
    let mut g = vec![0.0; d.len()];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let i = row + x;
            if x + 1 < w {
                let s = sign(d[i + 1] - d[i]);
                g[i + 1] += s;
                g[i] -= s;
            }
            if y + 1 < h {
                let s = sign(d[i + w] - d[i]);
                g[i + w] += s;
                g[i] -= s;
            }
        }
    }
    Image::from_raw(w, h, g)
}

pub fn l1_eval(img: &Image) -> f64 {
    img.data().iter().map(|v| v.abs()).sum()
}

pub fn l1_subgradient(img: &Image) -> Image {
    img.map(sign)
}

pub fn l2_eval(img: &Image) -> f64 {
    img.norm()
}

/// `w / |w|`, or zero at the origin.
pub fn l2_subgradient(img: &Image) -> Image {
    let n = img.norm();
    if n > 0.0 {
        img.scaled(1.0 / n)
    } else {
        img.map(|_| 0.0)
    }
}
