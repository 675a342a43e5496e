//! Geometric variational inference.
//!
//! Posterior approximation for models written in standard coordinates
//! (latent `xi` with a unit Gaussian prior). The posterior metric
//! `M(xi) = J(xi)^T J(xi) + 1`, with `J` the Jacobian of a metric-root
//! transform of the likelihood, defines an approximate isometry `g` to
//! Euclidean space. A unit Gaussian in the transformed coordinates, pushed
//! back through `g`, is the geoVI approximation; its first-order limit is
//! MGVI.
//!
//! Crate layout:
//!
//! - [`linalg`]: vectors, RNG streams, implicit operators, CG, dense
//!   helpers and a radix-2 FFT.
//! - [`diffmap`]: differentiable maps with tangent/cotangent actions.
//! - [`likelihoods`]: likelihood energies and their metric-root transforms.
//! - [`geometry`]: the posterior metric, the transformation `g`, and
//!   residual samplers.
//! - [`optimize`]: Newton-CG and the sampled KL objective.
//! - [`inference`]: geoVI/MGVI drivers, the direct method, ELBO, HMC and
//!   grid oracles.
//! - [`cfmodel`]: correlated-field priors and the example model zoo.
//! - [`cli`]: the experiment runner behind the `geovi` binary.

pub mod cfmodel;
pub mod cli;
pub mod diffmap;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod likelihoods;
pub mod linalg;
pub mod optimize;

pub use error::{Error, Result};
