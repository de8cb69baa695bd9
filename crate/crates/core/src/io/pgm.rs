use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

fn skip_space_and_comments(buf: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < buf.len() && buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < buf.len() && buf[pos] == b'#' {
            while pos < buf.len() && buf[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn header_number(buf: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    *pos = skip_space_and_comments(buf, *pos);
    let start = *pos;
    while *pos < buf.len() && buf[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&buf[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("PGM header: missing or invalid {what}")))
}

/// Decodes a binary (P5) PGM. Samples keep their stored values; 16-bit
/// rasters are read big-endian.
pub fn decode_pgm(buf: &[u8]) -> Result<Image> {
    if buf.len() < 2 || &buf[..2] != b"P5" {
        return Err(Error::Format("not a binary PGM (expected P5 magic)".into()));
    }
    let mut pos = 2;
    let width = header_number(buf, &mut pos, "width")?;
    let height = header_number(buf, &mut pos, "height")?;
    let maxval = header_number(buf, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!(
            "PGM has empty size {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    if pos >= buf.len() || !buf[pos].is_ascii_whitespace() {
        return Err(Error::Format(
            "PGM header not terminated by whitespace".into(),
        ));
    }
    pos += 1;
    let bytes_per = if maxval < 256 { 1 } else { 2 };
    let n = width * height;
    let raster = &buf[pos..];
    if raster.len() < n * bytes_per {
        return Err(Error::Format(format!(
            "PGM raster truncated: need {} bytes, have {}",
            n * bytes_per,
            raster.len()
        )));
    }
    let data = if bytes_per == 1 {
        raster[..n].iter().map(|&b| f64::from(b)).collect()
    } else {
        raster[..2 * n]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    Image::new(width, height, data)
}

/// Rounds to the nearest integer and clamps to `[0, 255]`.
pub fn quantize(img: &Image) -> Vec<u8> {
    img.data()
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Encodes an 8-bit binary PGM with maxval 255.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(quantize(img));
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}
