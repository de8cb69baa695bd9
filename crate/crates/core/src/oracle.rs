//! Brute-force references for tiny problems, used to cross-check the
//! epigraph projection and the cost subgradients.
//!
//! For a nonnegative cost the point of the epigraph nearest to `(v, 0)` lies
//! on the boundary `y = f(w)`, so the projection reduces to minimising
//! `g(w) = |v - w|^2 + f(w)^2`, a strongly convex problem. The oracle runs
//! plain subgradient descent on `g` with diminishing steps, then polishes the
//! piecewise-linear costs by solving the smooth problem on the face picked
//! out by the near-zero pieces. None of this touches the hyperplane code in
//! [`crate::epigraph`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costs::{Cost, CostKind};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Base step; iteration `k` uses `step / sqrt(k)`.
    pub step: f64,
    pub iters: usize,
    /// Largest objective decrease a random perturbation may find before the
    /// result is flagged as not stationary.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            step: 0.05,
            iters: 50_000,
            tol: 1e-4,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.tol > 0.0 && self.iters > 0) {
            return Err(Error::Config(format!(
                "oracle settings must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub w: Image,
    pub y: f64,
    pub objective: f64,
    /// Largest decrease of the objective found by random perturbations of
    /// size `1e-4`.
    pub max_descent: f64,
    pub stationary: bool,
}

/// `|v - w|^2 + f(w)^2`.
pub fn oracle_objective(v: &Image, f: CostKind, w: &Image) -> f64 {
    let c = f.eval(w);
    v.dist_sq(w) + c * c
}

const MAX_LEN: usize = 16;

pub fn oracle_epigraph_projection(
    v: &Image,
    f: CostKind,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    cfg.validate()?;
    v.ensure_finite()?;
    if v.len() > MAX_LEN {
        return Err(Error::Argument(format!(
            "oracle handles at most {MAX_LEN} samples, got {}",
            v.len()
        )));
    }

    let mut w = v.clone();
    let mut best = w.clone();
    let mut best_obj = oracle_objective(v, f, &w);
    for k in 1..=cfg.iters {
        let c = f.eval(&w);
        let grad = w.sub(v).add_scaled(c, &f.subgradient(&w)).scaled(2.0);
        w = w.add_scaled(-cfg.step / (k as f64).sqrt(), &grad);
        let obj = oracle_objective(v, f, &w);
        if obj < best_obj {
            best_obj = obj;
            best = w.clone();
        }
    }

    if let Some(pieces) = linear_pieces(f, v.width(), v.height()) {
        for _ in 0..3 {
            let Some((w, obj)) = polish(v, f, &pieces, &best) else {
                break;
            };
            // the face solve is exact, so it wins ties at rounding level
            if obj <= best_obj * (1.0 + 1e-12) && w != best {
                best_obj = obj.min(best_obj);
                best = w;
            } else {
                break;
            }
        }
    }

    let max_descent = probe_descent(v, f, &best, 1e-4, 256);
    let y = f.eval(&best);
    Ok(OracleResult {
        w: best,
        y,
        objective: best_obj,
        max_descent,
        stationary: max_descent <= cfg.tol,
    })
}

/// Rows `p_j` with `f(w) = sum_j |<p_j, w>|`, for the piecewise-linear costs.
fn linear_pieces(f: CostKind, width: usize, height: usize) -> Option<Vec<Vec<f64>>> {
    let n = width * height;
    match f {
        CostKind::L1 => Some(
            (0..n)
                .map(|i| {
                    let mut r = vec![0.0; n];
                    r[i] = 1.0;
                    r
                })
                .collect(),
        ),
        CostKind::Tv => {
            let mut rows = Vec::new();
            for y in 0..height {
                for x in 0..width {
                    let i = y * width + x;
                    for j in [
                        (x + 1 < width).then_some(i + 1),
                        (y + 1 < height).then_some(i + width),
                    ]
                    .into_iter()
                    .flatten()
                    {
                        let mut r = vec![0.0; n];
                        r[j] = 1.0;
                        r[i] = -1.0;
                        rows.push(r);
                    }
                }
            }
            Some(rows)
        }
        CostKind::L2 => None,
    }
}

/// Minimises the objective on the face where the pieces that are nearly zero
/// at `w` vanish and the others keep their sign. Tries a ladder of
/// thresholds and keeps the best true objective.
fn polish(v: &Image, f: CostKind, pieces: &[Vec<f64>], w: &Image) -> Option<(Image, f64)> {
    let n = v.len();
    let vals: Vec<f64> = pieces
        .iter()
        .map(|p| p.iter().zip(w.data()).map(|(a, b)| a * b).sum())
        .collect();
    let scale = 1.0 + v.data().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut out: Option<(Image, f64)> = None;
    for exp in 1..=10 {
        let tau = scale * 10f64.powi(-exp);
        let zero: Vec<usize> = (0..pieces.len())
            .filter(|&j| vals[j].abs() <= tau)
            .collect();
        let mut c = vec![0.0; n];
        for (j, p) in pieces.iter().enumerate() {
            if vals[j].abs() > tau {
                let s = vals[j].signum();
                for (ci, pi) in c.iter_mut().zip(p) {
                    *ci += s * pi;
                }
            }
        }
        // KKT system of min |v - w|^2 + (c'w)^2 s.t. P_Z w = 0
        let m = zero.len();
        let mut a = DMatrix::zeros(n + m, n + m);
        let mut rhs = DVector::zeros(n + m);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = c[i] * c[j] + if i == j { 1.0 } else { 0.0 };
            }
            rhs[i] = v.data()[i];
        }
        for (r, &j) in zero.iter().enumerate() {
            for i in 0..n {
                a[(n + r, i)] = pieces[j][i];
                a[(i, n + r)] = pieces[j][i];
            }
        }
        let Ok(sol) = a.svd(true, true).solve(&rhs, 1e-12) else {
            continue;
        };
        let cand = Image::new(v.width(), v.height(), sol.iter().take(n).copied().collect()).ok()?;
        let obj = oracle_objective(v, f, &cand);
        if out.as_ref().is_none_or(|(_, o)| obj < *o) {
            out = Some((cand, obj));
        }
    }
    out
}

fn probe_descent(v: &Image, f: CostKind, w: &Image, radius: f64, probes: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let base = oracle_objective(v, f, w);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let dir: Vec<f64> = (0..w.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let step = Image::new(w.width(), w.height(), dir).expect("finite");
        let moved = w.add_scaled(radius / norm, &step);
        worst = worst.max(base - oracle_objective(v, f, &moved));
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostCheckReport {
    pub samples: usize,
    /// `max(f(w) + <g(w), u - w> - f(u))` over the sampled pairs, `None` when
    /// no samples were drawn.
    pub max_violation: Option<f64>,
}

/// Samples random image pairs of the given shape and measures how badly
/// the subgradient inequality fails.
pub fn oracle_cost_check(
    f: CostKind,
    (width, height): (usize, usize),
    samples: usize,
    seed: u64,
) -> Result<CostCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Image::new(
            width,
            height,
            (0..width * height)
                .map(|_| rng.gen_range(-10.0..10.0))
                .collect(),
        )
    };
    let mut worst: Option<f64> = None;
    for _ in 0..samples {
        let w = draw(&mut rng)?;
        let u = draw(&mut rng)?;
        let lower = f.eval(&w) + f.subgradient(&w).dot(&u.sub(&w));
        let viol = lower - f.eval(&u);
        worst = Some(worst.map_or(viol, |m: f64| m.max(viol)));
    }
    Ok(CostCheckReport {
        samples,
        max_violation: worst,
    })
}
