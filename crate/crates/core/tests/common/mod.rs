#![allow(dead_code)]

use pesc::Image;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// 64x64 piecewise-constant test scene: two overlapping rectangles and a disc
/// on a dark background.
pub fn scene() -> Image {
    let (w, h) = (64usize, 64usize);
    let mut d = vec![40.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if (10..40).contains(&y) && (12..50).contains(&x) {
                d[i] = 200.0;
            }
            if (30..58).contains(&y) && (30..60).contains(&x) {
                d[i] = 120.0;
            }
            let (dy, dx) = (y as f64 - 45.0, x as f64 - 18.0);
            if dy * dy + dx * dx < 100.0 {
                d[i] = 230.0;
            }
        }
    }
    Image::new(w, h, d).unwrap()
}

/// Small random vector for oracle comparisons. Every other draw is rounded
/// to integers so that ties (kinks of TV and l1) show up.
pub fn small_vector(rng: &mut ChaCha8Rng, k: usize) -> Image {
    let (w, h) = if k % 7 == 6 {
        (2, 2)
    } else {
        (rng.gen_range(1..=5), 1)
    };
    let data = (0..w * h)
        .map(|_| {
            let x: f64 = rng.gen_range(-5.0..5.0);
            if k.is_multiple_of(2) {
                x.round()
            } else {
                x
            }
        })
        .collect();
    Image::new(w, h, data).unwrap()
}
