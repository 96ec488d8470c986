//! Gaussian maximum-likelihood and Whittle estimation for stationary Gaussian
//! series with long-range dependence, plus numerical checks of the Lipschitz
//! condition on the spectral family and Monte Carlo checks of the stochastic
//! equicontinuity of the Toeplitz quadratic form.
//!
//! The numeric core (spectral families, Toeplitz algebra, likelihoods,
//! simulation, the Lipschitz-ratio checker) is generic over [`Scalar`]
//! (`f32` or `f64`). The Monte Carlo harnesses run in `f64`. Concrete aliases
//! for both precisions are exported at the crate root.

pub mod condition_checker;
pub mod dense;
pub mod equicontinuity_lab;
pub mod error;
pub mod estimation;
pub mod likelihood;
pub mod quadrature;
pub mod scalar;
pub mod seed;
pub mod series;
pub mod simulation;
pub mod spectral_models;
pub mod toeplitz;

pub mod cli;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::{Centering, SeriesProvenance, SeriesSample};
pub use spectral_models::{
    AutocovMethod, AutocovSequence, Family, HSpec, LogSpectrum, ModelSpecFile, ParamBox,
    SpectralModel, Theta,
};
pub use toeplitz::{QuadFormResult, SolveMethod, ToeplitzSpec};

pub type SpectralModel64 = SpectralModel<f64>;
pub type SpectralModel32 = SpectralModel<f32>;
pub type Theta64 = Theta<f64>;
pub type Theta32 = Theta<f32>;
pub type AutocovSequence64 = AutocovSequence<f64>;
pub type AutocovSequence32 = AutocovSequence<f32>;
pub type ToeplitzSpec64 = ToeplitzSpec<f64>;
pub type ToeplitzSpec32 = ToeplitzSpec<f32>;
pub type QuadFormResult64 = QuadFormResult<f64>;
pub type QuadFormResult32 = QuadFormResult<f32>;
pub type SeriesSample64 = SeriesSample<f64>;
pub type SeriesSample32 = SeriesSample<f32>;
pub type Periodogram64 = likelihood::Periodogram<f64>;
pub type Periodogram32 = likelihood::Periodogram<f32>;
pub type EmbeddingPlan64 = simulation::EmbeddingPlan<f64>;
pub type EmbeddingPlan32 = simulation::EmbeddingPlan<f32>;
pub type A9Ratio64 = condition_checker::A9Ratio<f64>;
pub type A9Ratio32 = condition_checker::A9Ratio<f32>;
