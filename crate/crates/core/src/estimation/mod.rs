//! Parameter fitting over the box, spectral Fisher information, and a
//! Monte Carlo harness for the sampling distribution of the estimators.

mod fisher;
mod fit;
mod normality;
mod optimize;

pub use fisher::{
    fisher_information, fisher_matrix, fisher_matrix_with, log_density_gradient, FisherMatrix, FisherOptions,
    DEFAULT_FISHER_ORDER, FD_RELATIVE_STEP,
};
pub use fit::{
    fit, fit_in_box, fit_with, FitResult, Objective, ObjectiveFn, BOUNDARY_TOL, FIT_TOLERANCE, MAX_EVALUATIONS,
};
pub use normality::{
    decile_deviation, mc_normality, normality_seed, NormalityReport, NormalitySummary, ReplicateRecord, MAX_FAILURE_RATE,
    MIN_REPS,
};
pub use optimize::Minimum;
