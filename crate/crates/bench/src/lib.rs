//! Fixtures shared by the benchmarks.

use pesc::{degrade, DegradationSpec, Image, Kernel};

/// Piecewise-constant `n`x`n` scene: two rectangles and a disc.
pub fn scene(n: usize) -> Image {
    let s = n as f64 / 64.0;
    let mut d = vec![40.0; n * n];
    for y in 0..n {
        for x in 0..n {
            let (fx, fy) = (x as f64 / s, y as f64 / s);
            let i = y * n + x;
            if (10.0..40.0).contains(&fy) && (12.0..50.0).contains(&fx) {
                d[i] = 200.0;
            }
            if (30.0..58.0).contains(&fy) && (30.0..60.0).contains(&fx) {
                d[i] = 120.0;
            }
            if (fy - 45.0).powi(2) + (fx - 18.0).powi(2) < 100.0 {
                d[i] = 230.0;
            }
        }
    }
    Image::new(n, n, d).expect("valid scene")
}

/// The scene blurred by a 3x3 box at 40 dB BSNR.
pub fn blurred(n: usize) -> (Image, Kernel) {
    let spec = DegradationSpec {
        kernel: Kernel::boxcar(3).expect("valid kernel"),
        target_bsnr_db: 40.0,
        seed: 1,
    };
    let (z, _) = degrade(&scene(n), &spec).expect("degrade");
    (z, spec.kernel)
}
