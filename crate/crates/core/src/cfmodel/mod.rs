//! Correlated-field priors with learned power spectra, point-source and
//! instrument models, and the example zoo.
//!
//! Conventions worth knowing: amplitudes live on the distinct nonzero
//! `|k|` values of the grid; the fluctuations parameter is the standard
//! deviation of the field's nonzero-mode part; the zero mode has its own
//! log-normal amplitude (offset std).

mod examples;
mod field;
mod sources;
mod spectrum;

pub use examples::{
    bimodal1d, linear_gaussian, linear_posterior, lognormal1d, lognormal_process, make_example,
    meanvar2d, poisson_separation, product2d, sigmoid1d, Derived, ExampleBundle, ExampleSummary,
    LognormalProcessConfig, PoissonSeparationConfig, Tuning, EXAMPLE_NAMES,
};
pub use field::{correlated_field, CorrelatedField, HarmonicSynthesis};
pub use sources::{normal_cdf, GaussianPsf, InverseGammaQuantile};
pub use spectrum::{
    transition_covariance, AmplitudeSpectrum, KBins, LogNormalPrior, NormalPrior, SpectrumParams,
    N_SCALARS,
};
