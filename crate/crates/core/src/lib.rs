//! Image deconvolution by alternating orthogonal projections between the
//! measurement hyperplanes of a blur model and the epigraph of a convex cost
//! (total variation, l1 or l2). No regularisation weight is needed: the
//! cost enters only through the geometry of its epigraph.
//!
//! The pieces, bottom up:
//!
//! * [`image`]: images, kernels, lifted vectors, zero-padded filtering.
//! * [`costs`]: the cost functionals and their subgradients.
//! * [`epigraph`]: projection onto the epigraph by supporting hyperplanes.
//! * [`data_consistency`]: row-action projections onto measurement sets.
//! * [`solver`]: the outer restoration loop and its convergence trace.
//! * [`metrics`] and [`synth`]: BSNR/ISNR/SNR and calibrated degradations.
//! * [`oracle`]: brute-force references for tiny problems.
//! * [`io`]: PGM, kernel and trace file formats.

pub mod costs;
pub mod data_consistency;
pub mod epigraph;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod oracle;
mod qp;
pub mod solver;
pub mod synth;

pub use costs::{Cost, CostKind};
pub use data_consistency::{project_row, project_slab, sweep, MeasurementModel};
pub use epigraph::{
    project_epigraph, project_level_set, project_supporting_hyperplane, EpigraphConfig,
    EpigraphMethod, EpigraphResult, ProjectionMode, SupportingHyperplane,
};
pub use error::{Error, Result};
pub use image::{convolve_at, convolve_full, lift, Image, Kernel, LiftedVector};
pub use metrics::{bsnr, empirical_bsnr, isnr, snr, QualityReport};
pub use solver::{
    deconvolve, trace_to_rows, ConvergenceTrace, OuterRecord, SolverConfig, SolverFailure, TraceRow,
};
pub use synth::{calibrate_sigma, degrade, DegradationSpec};
