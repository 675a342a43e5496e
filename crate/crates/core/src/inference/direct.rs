//! The direct method: minimize `H(xi) + log|M(xi)| / 2` with a dense
//! log-determinant. Low-dimensional diagnostic only.

use crate::error::{Error, Result};
use crate::geometry::Model;
use crate::linalg::{cholesky_logdet, materialize};
use crate::optimize::{newton_cg, Evaluation, NewtonCgConfig, NewtonResult, Objective};

/// Largest dimension accepted by the direct method.
pub const DIRECT_MAX_DIM: usize = 64;

pub struct DirectObjective<'a> {
    model: &'a Model,
    /// Central-difference step for the log-determinant gradient.
    pub fd_step: f64,
}

impl<'a> DirectObjective<'a> {
    pub fn new(model: &'a Model) -> Result<Self> {
        let dim = model.prior_dim();
        if dim > DIRECT_MAX_DIM {
            return Err(Error::DimensionTooLarge {
                dim,
                limit: DIRECT_MAX_DIM,
            });
        }
        crate::linalg::dense::check_dense_dim(dim)?;
        Ok(DirectObjective {
            model,
            fd_step: 1e-5,
        })
    }

    pub fn logdet_metric(&self, xi: &[f64]) -> Result<f64> {
        let m = materialize(&self.model.metric(xi)?, xi.len())?;
        cholesky_logdet(&m)
    }

    fn logdet_grad(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let h = self.fd_step * (crate::linalg::vector::norm(xi) + 1.0);
        (0..xi.len())
            .map(|k| {
                let mut p = xi.to_vec();
                let mut q = xi.to_vec();
                p[k] += h;
                q[k] -= h;
                Ok((self.logdet_metric(&p)? - self.logdet_metric(&q)?) / (2.0 * h))
            })
            .collect()
    }
}

impl Objective for DirectObjective<'_> {
    fn dim(&self) -> usize {
        self.model.prior_dim()
    }
    fn value(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.model.hamiltonian(xi)? + 0.5 * self.logdet_metric(xi)?)
    }
    fn evaluate(&self, xi: &[f64]) -> Result<Evaluation> {
        let (h, mut grad) = self.model.hamiltonian_grad(xi)?;
        let ld = self.logdet_metric(xi)?;
        for (g, d) in grad.iter_mut().zip(self.logdet_grad(xi)?) {
            *g += 0.5 * d;
        }
        Ok(Evaluation {
            value: h + 0.5 * ld,
            grad,
            curvature: Box::new(self.model.metric(xi)?),
        })
    }
}

pub fn direct_config() -> NewtonCgConfig {
    NewtonCgConfig {
        max_iter: 200,
        // Finite-difference noise in the log-det gradient sits near 1e-10.
        grad_tol: 1e-8,
        rel_energy_tol: 1e-14,
        ..Default::default()
    }
}

/// Optimal expansion point of the direct method, starting from `x0`.
pub fn run_direct_lowdim(model: &Model, x0: &[f64], cfg: &NewtonCgConfig) -> Result<NewtonResult> {
    let obj = DirectObjective::new(model)?;
    let res = newton_cg(&obj, x0, cfg)?;
    if !res.converged() && res.grad_norm > 1e-5 {
        return Err(Error::NotConverged {
            context: "direct method".into(),
            residual: res.grad_norm,
        });
    }
    Ok(res)
}
