//! The deconvolution loop: each outer round runs one sweep of measurement
//! projections and then projects the result onto the epigraph of the cost.

use crate::costs::{Cost, CostKind};
use crate::data_consistency::{sweep, MeasurementModel};
use crate::epigraph::{project_epigraph, EpigraphConfig, EpigraphMethod};
use crate::error::{Error, Result};
use crate::image::{Image, Kernel};
use crate::metrics::isnr;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub outer_iters: usize,
    pub epigraph: EpigraphConfig,
    pub cost: CostKind,
    pub use_slabs: bool,
    pub slab_eps: Option<f64>,
}

impl Default for SolverConfig {
    /// Ten outer rounds with the single-hyperplane epigraph step. The exact
    /// projection of a whole image onto the TV epigraph flattens it towards a
    /// constant, so the solver does not use the cutting-plane method unless
    /// asked to.
    fn default() -> Self {
        Self {
            outer_iters: 10,
            epigraph: EpigraphConfig {
                method: EpigraphMethod::SingleHyperplane,
                ..EpigraphConfig::default()
            },
            cost: CostKind::Tv,
            use_slabs: false,
            slab_eps: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 {
            return Err(Error::Config("outer_iters must be at least 1".into()));
        }
        self.epigraph.validate()?;
        if self.use_slabs {
            match self.slab_eps {
                Some(e) if e >= 0.0 && e.is_finite() => {}
                Some(e) => return Err(Error::Config(format!("slab_eps must be >= 0, got {e}"))),
                None => return Err(Error::Config("use_slabs requires slab_eps".into())),
            }
        }
        Ok(())
    }
}

/// What happened during one outer round.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    /// Distances from the lifted input to each feasible epigraph candidate.
    pub distances: Vec<f64>,
    /// Cost of each epigraph candidate.
    pub costs: Vec<f64>,
    pub refined: bool,
    pub converged: bool,
    pub residual_before_sweep: f64,
    pub residual_after_sweep: f64,
    /// Residual `|z - v * h|` of this round's output.
    pub residual: f64,
    pub cost_before_epigraph: f64,
    pub cost_after_epigraph: f64,
    /// `|w - v|` between the epigraph output and its input.
    pub epigraph_shift: f64,
    pub isnr_db: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub outer: Vec<OuterRecord>,
}

impl ConvergenceTrace {
    pub fn isnr_series(&self) -> Vec<f64> {
        self.outer.iter().filter_map(|r| r.isnr_db).collect()
    }
}

/// One line of the tabular trace: a single epigraph step inside an outer
/// round. Round-level quantities repeat on every line of their round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub outer: usize,
    pub inner: usize,
    pub dist_to_v0: f64,
    pub cost_value: f64,
    pub data_residual: f64,
    pub isnr_db: Option<f64>,
}

pub fn trace_to_rows(trace: &ConvergenceTrace) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for (k, rec) in trace.outer.iter().enumerate() {
        for (i, (&d, &c)) in rec.distances.iter().zip(&rec.costs).enumerate() {
            rows.push(TraceRow {
                outer: k + 1,
                inner: i + 1,
                dist_to_v0: d,
                cost_value: c,
                data_residual: rec.residual,
                isnr_db: rec.isnr_db,
            });
        }
    }
    rows
}

/// Numeric failure together with everything recorded before it.
#[derive(Debug)]
pub struct SolverFailure {
    pub error: Error,
    pub trace: ConvergenceTrace,
}

impl From<Error> for SolverFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            trace: ConvergenceTrace::default(),
        }
    }
}

impl std::fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} after {} outer rounds",
            self.error,
            self.trace.outer.len()
        )
    }
}

impl std::error::Error for SolverFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Restores `z` blurred by `h`. When `ground_truth` is given, the ISNR of
/// every round's output is recorded.
pub fn deconvolve(
    z: &Image,
    h: &Kernel,
    cfg: &SolverConfig,
    ground_truth: Option<&Image>,
) -> std::result::Result<(Image, ConvergenceTrace), SolverFailure> {
    cfg.validate()?;
    if let Some(t) = ground_truth {
        z.ensure_same_shape(t)?;
    }
    let slab = if cfg.use_slabs { cfg.slab_eps } else { None };
    let model = MeasurementModel::new(z.clone(), h.clone(), slab)?;

    let mut trace = ConvergenceTrace::default();
    let mut v = z.clone();
    for _ in 0..cfg.outer_iters {
        let step = (|| -> Result<(Image, OuterRecord)> {
            let residual_before_sweep = model.residual_norm(&v)?;
            let swept = sweep(&v, &model)?;
            let residual_after_sweep = model.residual_norm(&swept)?;
            let cost_before_epigraph = cfg.cost.eval(&swept);
            let r = project_epigraph(&swept, &cfg.cost, &cfg.epigraph)?;
            let out = r.w_star;
            let rec = OuterRecord {
                costs: r.costs,
                distances: r.distances,
                refined: r.refined,
                converged: r.converged,
                residual_before_sweep,
                residual_after_sweep,
                residual: model.residual_norm(&out)?,
                cost_before_epigraph,
                cost_after_epigraph: cfg.cost.eval(&out),
                epigraph_shift: out.dist_sq(&swept).sqrt(),
                isnr_db: ground_truth.map(|t| isnr(z, &out, t)).transpose()?,
            };
            Ok((out, rec))
        })();
        match step {
            Ok((out, rec)) => {
                v = out;
                trace.outer.push(rec);
            }
            Err(error) => return Err(SolverFailure { error, trace }),
        }
    }
    Ok((v, trace))
}
