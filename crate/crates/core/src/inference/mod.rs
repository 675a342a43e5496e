//! Inference drivers: geoVI and MGVI, the direct method, the ELBO, a
//! reference HMC sampler and grid oracles.

pub mod direct;
pub mod elbo;
pub mod grid;
pub mod hmc;
pub mod variational;

pub use direct::{direct_config, run_direct_lowdim, DirectObjective, DIRECT_MAX_DIM};
pub use elbo::{elbo, logdet_metric, ElboEstimate, FULL_ELBO_MAX_DIM};
pub use grid::{
    gaussian_density, grid_kl, grid_log_evidence, mgvi_density, moment_matched_normal, optimal_normal,
    posterior_density, transform_density, GridDensity, GridSpec,
};
pub use hmc::{hmc_reference, HmcConfig, HmcResult};
pub use variational::{
    draw_residual_set, moments, run_geovi, run_mgvi, run_variational, run_variational_from,
    ApproximationState, Method, OuterStep, VariationalConfig,
};
