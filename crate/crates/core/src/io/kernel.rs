use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Kernel;

/// Parses a kernel file: the size `N` on the first line, then `N` lines of
/// `N` whitespace-separated taps. Taps are used as written.
pub fn parse_kernel(text: &str) -> Result<Kernel> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let size: usize = lines
        .next()
        .ok_or_else(|| Error::Format("kernel file is empty".into()))?
        .parse()
        .map_err(|_| Error::Format("kernel size must be a positive integer".into()))?;
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::Kernel(format!(
            "kernel size must be odd, got {size}"
        )));
    }
    let mut taps = Vec::with_capacity(size * size);
    for row in 0..size {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format(format!("kernel file has {row} rows, expected {size}")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("kernel row {}: {e}", row + 1)))?;
        if vals.len() != size {
            return Err(Error::Format(format!(
                "kernel row {} has {} taps, expected {size}",
                row + 1,
                vals.len()
            )));
        }
        taps.extend(vals);
    }
    if lines.next().is_some() {
        return Err(Error::Format(format!(
            "kernel file has more than {size} rows"
        )));
    }
    Kernel::new(size, taps)
}

pub fn read_kernel(path: impl AsRef<Path>) -> Result<Kernel> {
    parse_kernel(&fs::read_to_string(path)?)
}

pub fn format_kernel(k: &Kernel) -> String {
    let mut s = format!("{}\n", k.size());
    for row in k.taps().chunks(k.size()) {
        let cells: Vec<String> = row.iter().map(|t| format!("{t:?}")).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}
