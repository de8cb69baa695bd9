//! File formats: binary PGM images, plain-text kernels, and CSV traces.

mod kernel;
mod pgm;
mod trace;

pub use kernel::{format_kernel, parse_kernel, read_kernel};
pub use pgm::{decode_pgm, encode_pgm, quantize, read_pgm, write_pgm};
pub use trace::{format_float, parse_trace_csv, save_trace, write_trace_csv, TRACE_HEADER};
