//! Active-set solver for the small nonnegative quadratic programs
//! `min 0.5 x'Gx - c'x  s.t. x >= 0` with `G` symmetric positive
//! semidefinite. This is the dual of projecting a point onto an
//! intersection of half-spaces.

use nalgebra::{DMatrix, DVector};

/// Solves `G_pp s = c_p` on the passive set, adding a growing ridge when the
/// restricted Gram matrix is numerically singular.
fn solve_passive(g: &DMatrix<f64>, c: &DVector<f64>, passive: &[usize]) -> DVector<f64> {
    let k = passive.len();
    let sub = DMatrix::from_fn(k, k, |i, j| g[(passive[i], passive[j])]);
    let rhs = DVector::from_fn(k, |i, _| c[passive[i]]);
    let scale = (0..k).map(|i| sub[(i, i)]).fold(1.0f64, f64::max);
    let mut ridge = 0.0;
    loop {
        let mut m = sub.clone();
        for i in 0..k {
            m[(i, i)] += ridge;
        }
        if let Some(ch) = m.cholesky() {
            return ch.solve(&rhs);
        }
        ridge = if ridge == 0.0 {
            1e-13 * scale
        } else {
            ridge * 10.0
        };
    }
}

/// Lawson-Hanson style active-set iteration, warm-started from `warm`
/// (entries beyond its length start at zero).
pub(crate) fn solve_nonneg_qp(g: &DMatrix<f64>, c: &DVector<f64>, warm: &[f64]) -> Vec<f64> {
    let m = c.len();
    let mut x = DVector::from_fn(m, |i, _| warm.get(i).copied().unwrap_or(0.0).max(0.0));
    let mut passive: Vec<bool> = x.iter().map(|&v| v > 0.0).collect();
    let tol = 1e-11 * c.amax().max(1.0);
    let max_outer = 3 * m + 30;

    for outer in 0..=max_outer {
        if outer > 0 || !passive.iter().any(|&p| p) {
            let grad = c - g * &x;
            let entering = (0..m)
                .filter(|&j| !passive[j] && grad[j] > tol)
                .max_by(|&a, &b| grad[a].total_cmp(&grad[b]));
            match entering {
                Some(j) => passive[j] = true,
                None => break,
            }
        }

        // Inner loop: move towards the unconstrained minimiser on the passive
        // set, dropping variables that hit zero.
        for _ in 0..=m {
            let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            if idx.is_empty() {
                break;
            }
            let s = solve_passive(g, c, &idx);
            if s.iter().all(|&v| v > 0.0) {
                for v in x.iter_mut() {
                    *v = 0.0;
                }
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = s[k];
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (k, &j) in idx.iter().enumerate() {
                if s[k] <= 0.0 {
                    let denom = x[j] - s[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (s[k] - x[j]);
            }
            for (k, &j) in idx.iter().enumerate() {
                if x[j] <= 1e-15 * (1.0 + s[k].abs()) || (s[k] <= 0.0 && alpha == 0.0) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x.iter().map(|&v| v.max(0.0)).collect()
}
