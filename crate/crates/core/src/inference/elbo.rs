//! Evidence lower bound from a variational state.
//!
//! `ELBO = dim/2 - log|M(xi_bar)|/2 - mean_i [H(d|xi_i) + |xi_i|^2/2]`
//! where the likelihood energy carries its full normalization. The
//! log-determinant is taken at the expansion point; in low dimension the
//! estimate with the per-sample determinant of the approximation's metric
//! is reported as well.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{gtilde_linearized, ExpansionPoint, Model};
use crate::linalg::dense::check_dense_dim;
use crate::linalg::{cholesky_logdet, materialize, FnOperator, ImplicitOperator};

use super::variational::ApproximationState;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElboEstimate {
    pub value: f64,
    /// Monte-Carlo standard error; antithetic partners are averaged first.
    pub std_error: f64,
    pub logdet_metric: f64,
    pub samples: usize,
    /// Estimate with `log|M~(xi_i)|` averaged over the samples instead of
    /// fixed at the expansion point, with its standard error. Only
    /// computed up to [`FULL_ELBO_MAX_DIM`] latent dimensions.
    pub full: Option<(f64, f64)>,
}

/// Largest latent dimension for which per-sample determinants are formed.
pub const FULL_ELBO_MAX_DIM: usize = 64;

/// Mean and standard error, averaging antithetic partners first.
fn mean_and_error(values: &[f64], antithetic: bool) -> (f64, f64) {
    let groups: Vec<f64> = if antithetic {
        values.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    } else {
        values.to_vec()
    };
    let k = groups.len() as f64;
    let mean = groups.iter().sum::<f64>() / k;
    let var = groups.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (k - 1.0).max(1.0);
    (mean, (var / k).sqrt())
}

/// `log|M~(xi)| = 2 log|det(1 + A^T J(xi))| - log|M(xi_bar)|`, the metric
/// pulled back through `g`.
fn logdet_pullback(model: &Model, xi: &[f64], ep: &ExpansionPoint, logdet_bar: f64) -> Result<f64> {
    let (_, jac) = gtilde_linearized(model, xi, ep)?;
    let det = materialize(&jac, xi.len())?.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::NonFiniteValue("singular transformation in ELBO".into()));
    }
    Ok(2.0 * det.abs().ln() - logdet_bar)
}

/// `log|1 + A^T A|`, in latent space or, when smaller, in data space via
/// the determinant lemma `|1 + A^T A| = |1 + A A^T|`.
pub fn logdet_metric(ep: &ExpansionPoint) -> Result<f64> {
    let (n_lat, n_dat) = (ep.jacobian().dim_in(), ep.jacobian().dim_out());
    if n_lat <= n_dat {
        check_dense_dim(n_lat)?;
        return cholesky_logdet(&materialize(&ep.metric(), n_lat)?);
    }
    check_dense_dim(n_dat)?;
    let a = ep.jacobian_arc();
    let data_space = FnOperator::symmetric(n_dat, move |u: &[f64]| {
        let mut out = a.apply(&a.apply_adjoint(u));
        crate::linalg::vector::add_assign(&mut out, u);
        out
    });
    cholesky_logdet(&materialize(&data_space, n_dat)?)
}

pub fn elbo(model: &Model, state: &ApproximationState) -> Result<ElboEstimate> {
    let ep = ExpansionPoint::new(model, &state.mean)?;
    let logdet = logdet_metric(&ep)?;
    let samples = state.samples();
    if samples.is_empty() {
        return Err(Error::BadShape("ELBO needs samples".into()));
    }
    let energies: Vec<f64> = samples
        .par_iter()
        .map(|xi| model.hamiltonian_full(xi))
        .collect::<Result<_>>()?;
    let (mean, std_error) = mean_and_error(&energies, state.antithetic);
    let dim = model.prior_dim() as f64;
    let full = if model.prior_dim() <= FULL_ELBO_MAX_DIM {
        let terms: Vec<f64> = samples
            .par_iter()
            .zip(&energies)
            .map(|(xi, e)| Ok(e + 0.5 * logdet_pullback(model, xi, &ep, logdet)?))
            .collect::<Result<_>>()?;
        let (m, se) = mean_and_error(&terms, state.antithetic);
        Some((0.5 * dim - m, se))
    } else {
        None
    };
    Ok(ElboEstimate {
        value: 0.5 * dim - 0.5 * logdet - mean,
        std_error,
        logdet_metric: logdet,
        samples: samples.len(),
        full,
    })
}
