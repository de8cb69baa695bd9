//! Orthogonal projection of a lifted point `(v, 0)` onto the epigraph
//! `{(w, y) : y >= f(w)}` of a convex cost, built from supporting
//! hyperplanes.
//!
//! Each iteration takes an anchor image `a`, forms the supporting hyperplane
//! of the epigraph at `(a, f(a))` from a subgradient `g`, and projects the
//! fixed point `(v, 0)` onto it. The image part of that projection (the
//! lifted point with its last coordinate forced to the level `0`) becomes the
//! next anchor. Every iterate `w_i` is also lifted onto the epigraph boundary
//! as the feasible candidate `(w_i, f(w_i))`; its distance to `(v, 0)` is the
//! recorded distance `d_i`, and the closest candidate is returned.
//!
//! Once `d_i` first increases, the next anchor becomes the midpoint of the
//! last two iterates, and midpoints are used from then on.
//!
//! Two methods share this loop:
//!
//! * [`EpigraphMethod::SingleHyperplane`] projects onto the most recent
//!   hyperplane only. It is cheap and is what the deconvolution solver uses,
//!   but it can cycle between sign patterns at kinks of TV and l1 without
//!   reaching the exact projection.
//! * [`EpigraphMethod::CuttingPlane`] projects onto the intersection of all
//!   supporting half-spaces collected so far. The polyhedral outer
//!   approximation tightens monotonically, so on small problems the iterates
//!   reach the exact projection.

use nalgebra::{DMatrix, DVector};

use crate::costs::Cost;
use crate::error::{Error, Result};
use crate::image::{dot, lift, Image, LiftedVector};
use crate::qp::solve_nonneg_qp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// Land on the epigraph boundary.
    Boundary,
    /// Push the result `interior_margin` further into the epigraph along the
    /// projection direction, giving a smoother image.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpigraphMethod {
    SingleHyperplane,
    CuttingPlane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphConfig {
    /// Stop once successive hyperplane projections move less than this.
    pub eps: f64,
    pub max_iters: usize,
    pub mode: ProjectionMode,
    pub interior_margin: f64,
    pub method: EpigraphMethod,
}

impl Default for EpigraphConfig {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            max_iters: 200,
            mode: ProjectionMode::Boundary,
            interior_margin: 0.0,
            method: EpigraphMethod::CuttingPlane,
        }
    }
}

impl EpigraphConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.interior_margin >= 0.0 && self.interior_margin.is_finite()) {
            return Err(Error::Config(format!(
                "interior_margin must be >= 0, got {}",
                self.interior_margin
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EpigraphResult {
    pub w_star: Image,
    pub y_star: f64,
    pub iterations: usize,
    /// `|(v, 0) - (w_i, f(w_i))|` for each iterate.
    pub distances: Vec<f64>,
    /// `f(w_i)` for each iterate.
    pub costs: Vec<f64>,
    /// `|(v, 0) - w_i|` where `w_i` is the hyperplane (or half-space
    /// intersection) projection itself. For the cutting-plane method these
    /// are lower bounds on the true distance.
    pub plane_distances: Vec<f64>,
    /// `|w_i - w_{i-1}|` between successive lifted projections, with
    /// `w_0 = (v, 0)`.
    pub step_gaps: Vec<f64>,
    pub refined: bool,
    /// False when `max_iters` ran out before the stopping rule fired.
    pub converged: bool,
}

impl EpigraphResult {
    pub fn lifted(&self) -> LiftedVector {
        LiftedVector {
            w: self.w_star.clone(),
            y: self.y_star,
        }
    }
}

/// Projection onto the half-space `y <= alpha`.
pub fn project_level_set(v: &LiftedVector, alpha: f64) -> LiftedVector {
    LiftedVector {
        w: v.w.clone(),
        y: v.y.min(alpha),
    }
}

/// The hyperplane `<g, u_w> - u_y = b` supporting the epigraph at
/// `(anchor, f(anchor))`; the epigraph lies on the side `<g, u_w> - u_y <= b`.
#[derive(Debug, Clone)]
pub struct SupportingHyperplane {
    pub normal: Image,
    pub offset: f64,
    normal_sq: f64,
}

impl SupportingHyperplane {
    pub fn at<C: Cost + ?Sized>(anchor: &Image, f: &C) -> Self {
        let normal = f.subgradient(anchor);
        let offset = normal.dot(anchor) - f.eval(anchor);
        let normal_sq = normal.norm_sq();
        Self {
            normal,
            offset,
            normal_sq,
        }
    }

    /// `<a, u> - b` with `a = [g; -1]`; positive outside the epigraph side.
    pub fn violation(&self, u: &LiftedVector) -> f64 {
        self.normal.dot(&u.w) - u.y - self.offset
    }

    pub fn project(&self, u: &LiftedVector) -> LiftedVector {
        let t = self.violation(u) / (self.normal_sq + 1.0);
        LiftedVector {
            w: u.w.add_scaled(-t, &self.normal),
            y: u.y + t,
        }
    }

    fn same_as(&self, other: &SupportingHyperplane) -> bool {
        let scale = 1e-12 * (1.0 + self.offset.abs());
        (self.offset - other.offset).abs() <= scale
            && (self.normal_sq - other.normal_sq).abs() <= 1e-12 * (1.0 + self.normal_sq)
            && self.normal.data() == other.normal.data()
    }
}

/// Orthogonal projection of `v0` onto the supporting hyperplane of the
/// epigraph of `f` at `(anchor_w, f(anchor_w))`.
pub fn project_supporting_hyperplane<C: Cost + ?Sized>(
    v0: &LiftedVector,
    anchor_w: &Image,
    f: &C,
) -> LiftedVector {
    SupportingHyperplane::at(anchor_w, f).project(v0)
}

/// Growing set of supporting half-spaces with the Gram matrix of their
/// normals `[g_j; -1]` and the last dual solution for warm starts.
#[derive(Default)]
struct Bundle {
    planes: Vec<SupportingHyperplane>,
    gram: Vec<Vec<f64>>,
    duals: Vec<f64>,
}

impl Bundle {
    fn contains(&self, p: &SupportingHyperplane) -> bool {
        self.planes.iter().any(|q| q.same_as(p))
    }

    fn push(&mut self, p: SupportingHyperplane) {
        let row: Vec<f64> = self
            .planes
            .iter()
            .map(|q| dot(q.normal.data(), p.normal.data()) + 1.0)
            .collect();
        for (r, &v) in self.gram.iter_mut().zip(&row) {
            r.push(v);
        }
        let mut row = row;
        row.push(p.normal_sq + 1.0);
        self.gram.push(row);
        self.planes.push(p);
    }

    /// Projection of `u` onto the intersection of all half-spaces.
    fn project(&mut self, u: &LiftedVector) -> LiftedVector {
        let m = self.planes.len();
        let g = DMatrix::from_fn(m, m, |i, j| self.gram[i][j]);
        let c = DVector::from_fn(m, |i, _| self.planes[i].violation(u));
        self.duals = solve_nonneg_qp(&g, &c, &self.duals);
        let mut w = u.w.clone();
        let mut y = u.y;
        for (p, &lam) in self.planes.iter().zip(&self.duals) {
            if lam > 0.0 {
                w = w.add_scaled(-lam, &p.normal);
                y += lam;
            }
        }
        LiftedVector { w, y }
    }
}

fn midpoint(a: &Image, b: &Image) -> Image {
    a.add_scaled(1.0, b).scaled(0.5)
}

fn check_finite(p: &LiftedVector, iteration: usize) -> Result<()> {
    if !p.y.is_finite() || p.w.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite epigraph iterate at step {iteration}"
        )));
    }
    Ok(())
}

/// Projects `(v, 0)` onto the epigraph of `f`.
pub fn project_epigraph<C: Cost + ?Sized>(
    v: &Image,
    f: &C,
    cfg: &EpigraphConfig,
) -> Result<EpigraphResult> {
    cfg.validate()?;
    v.ensure_finite()?;
    let v0 = lift(v, 0.0)?;

    let mut bundle = Bundle::default();
    let mut anchor = v.clone();
    let mut prev: Option<LiftedVector> = None;
    let mut distances = Vec::new();
    let mut costs = Vec::new();
    let mut plane_distances = Vec::new();
    let mut step_gaps = Vec::new();
    let mut best: Option<(f64, Image, f64)> = None;
    let mut refined = false;
    let mut converged = false;

    for it in 0..cfg.max_iters {
        let plane = SupportingHyperplane::at(&anchor, f);
        let outside = plane.violation(&v0) >= 0.0;
        let point = match cfg.method {
            EpigraphMethod::SingleHyperplane => plane.project(&v0),
            EpigraphMethod::CuttingPlane => {
                if !bundle.contains(&plane) {
                    bundle.push(plane);
                }
                bundle.project(&v0)
            }
        };
        check_finite(&point, it)?;

        let cost = f.eval(&point.w);
        let d = (v.dist_sq(&point.w) + cost * cost).sqrt();
        distances.push(d);
        costs.push(cost);
        plane_distances.push(v0.distance(&point));
        let gap = prev.as_ref().unwrap_or(&v0).distance(&point);
        step_gaps.push(gap);
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            best = Some((d, point.w.clone(), cost));
        }

        // Landing inside the epigraph from the outer side of a supporting
        // half-space (or of the whole bundle) means the projection is exact.
        let feasible = point.y >= cost - 1e-12 * (1.0 + cost.abs());
        let exact = feasible
            && match cfg.method {
                EpigraphMethod::SingleHyperplane => outside,
                EpigraphMethod::CuttingPlane => true,
            };
        if exact || (it > 0 && gap <= cfg.eps) {
            converged = true;
            break;
        }

        if !refined && it > 0 && d > distances[it - 1] {
            refined = true;
        }
        let level = project_level_set(&point, 0.0);
        anchor = match (&prev, refined) {
            (Some(p), true) => {
                let mid = midpoint(&level.w, &p.w);
                if cfg.method == EpigraphMethod::CuttingPlane
                    && bundle.contains(&SupportingHyperplane::at(&mid, f))
                {
                    level.w
                } else {
                    mid
                }
            }
            _ => level.w,
        };
        prev = Some(point);
    }

    let (_, mut w_star, mut y_star) = best.expect("max_iters >= 1");
    if cfg.mode == ProjectionMode::Interior && cfg.interior_margin > 0.0 {
        let dw = w_star.sub(v);
        let norm = (dw.norm_sq() + y_star * y_star).sqrt();
        if norm > 0.0 {
            let s = cfg.interior_margin / norm;
            w_star = w_star.add_scaled(s, &dw);
            y_star += s * y_star;
        } else {
            y_star += cfg.interior_margin;
        }
        y_star = y_star.max(f.eval(&w_star));
    }

    Ok(EpigraphResult {
        w_star,
        y_star,
        iterations: distances.len(),
        distances,
        costs,
        plane_distances,
        step_gaps,
        refined,
        converged,
    })
}
