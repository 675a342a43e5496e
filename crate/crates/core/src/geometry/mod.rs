//! The posterior metric and the approximate isometry built from it.
//!
//! With `x(xi)` the metric-root transform of the likelihood composed with
//! the forward model and `J = dx/dxi`, the posterior metric is
//! `M(xi) = J^T J + 1`. Around an expansion point `xi_bar` the map
//!
//! ```text
//! g~(xi; xi_bar) = xi - xi_bar + A^T (x(xi) - x(xi_bar)),   A = J(xi_bar)
//! ```
//!
//! has Jacobian `M(xi_bar)` at `xi_bar`, and `g = M(xi_bar)^{-1/2} g~` is a
//! local isometry to Euclidean space.

mod dense;
mod sampling;

use std::sync::Arc;

use crate::diffmap::{self, MapRef};
use crate::error::{Error, Result};
use crate::likelihoods::Likelihood;
use crate::linalg::vector::{check_finite, check_len, norm_sq, sub};
use crate::linalg::{ImplicitOperator, OperatorRef};

pub use dense::DenseTransform;
pub use sampling::{
    draw_mgvi_residual, draw_residual, invert_gtilde, sample_z, Inversion, ResidualDraw,
    SamplerConfig, StartMode,
};

/// A model in standard coordinates: unit Gaussian prior on `xi`, forward
/// map `xi -> s'` and a likelihood on `s'`.
#[derive(Clone)]
pub struct Model {
    forward: MapRef,
    likelihood: Arc<Likelihood>,
    xi_transform: MapRef,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("prior_dim", &self.prior_dim())
            .field("forward", &self.forward.name())
            .finish()
    }
}

impl Model {
    pub fn new(forward: MapRef, likelihood: Likelihood) -> Result<Self> {
        if forward.dim_out() != likelihood.dim_in() {
            return Err(Error::mismatch(
                "model forward output vs likelihood input",
                likelihood.dim_in(),
                forward.dim_out(),
            ));
        }
        let xi_transform = diffmap::compose(likelihood.transform()?, forward.clone())?;
        Ok(Model {
            forward,
            likelihood: Arc::new(likelihood),
            xi_transform,
        })
    }

    pub fn prior_dim(&self) -> usize {
        self.forward.dim_in()
    }

    pub fn forward(&self) -> &MapRef {
        &self.forward
    }

    pub fn likelihood(&self) -> &Likelihood {
        &self.likelihood
    }

    /// `xi -> x(xi)`.
    pub fn xi_transform(&self) -> &MapRef {
        &self.xi_transform
    }

    pub fn dim_x(&self) -> usize {
        self.xi_transform.dim_out()
    }

    fn check_input(&self, xi: &[f64]) -> Result<()> {
        check_len("model input", self.prior_dim(), xi)?;
        check_finite("model input", xi)
    }

    /// Posterior information Hamiltonian up to constants.
    pub fn hamiltonian(&self, xi: &[f64]) -> Result<f64> {
        self.check_input(xi)?;
        let s = self.forward.apply(xi)?;
        Ok(self.likelihood.energy(&s)? + 0.5 * norm_sq(xi))
    }

    pub fn hamiltonian_grad(&self, xi: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_input(xi)?;
        let (s, jac) = self.forward.linearize(xi)?;
        let (e, g) = self.likelihood.energy_grad(&s)?;
        let mut grad = jac.apply_adjoint(&g);
        crate::linalg::vector::add_assign(&mut grad, xi);
        check_finite("hamiltonian gradient", &grad)?;
        Ok((e + 0.5 * norm_sq(xi), grad))
    }

    /// `-log P(d|xi) - log N(xi; 0, 1)` without the prior's `log 2 pi`
    /// term, i.e. the likelihood carries its full normalization.
    pub fn hamiltonian_full(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.hamiltonian(xi)? + self.likelihood.normalization())
    }

    /// Metric operator `J^T J + 1` at `xi`.
    pub fn metric(&self, xi: &[f64]) -> Result<MetricOperator> {
        self.check_input(xi)?;
        let (_, jac) = self.xi_transform.linearize(xi)?;
        Ok(MetricOperator { jac })
    }

    pub fn metric_mvp(&self, xi: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_len("metric_mvp", self.prior_dim(), v)?;
        Ok(self.metric(xi)?.apply(v))
    }
}

/// `v -> J^T J v + v`.
pub struct MetricOperator {
    jac: OperatorRef,
}

impl MetricOperator {
    pub fn jacobian(&self) -> &dyn ImplicitOperator {
        self.jac.as_ref()
    }
}

impl ImplicitOperator for MetricOperator {
    fn dim_in(&self) -> usize {
        self.jac.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.jac.dim_in()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.jac.apply_adjoint(&self.jac.apply(v));
        crate::linalg::vector::add_assign(&mut out, v);
        out
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u)
    }
}

/// Cached quantities at an expansion point.
pub struct ExpansionPoint {
    xi_bar: Vec<f64>,
    x_bar: Vec<f64>,
    jac: Arc<dyn ImplicitOperator>,
}

impl ExpansionPoint {
    pub fn new(model: &Model, xi_bar: &[f64]) -> Result<Self> {
        model.check_input(xi_bar)?;
        let (x_bar, jac) = model.xi_transform.linearize(xi_bar)?;
        check_finite("x at expansion point", &x_bar)?;
        Ok(ExpansionPoint {
            xi_bar: xi_bar.to_vec(),
            x_bar,
            jac: Arc::from(jac),
        })
    }

    pub fn xi_bar(&self) -> &[f64] {
        &self.xi_bar
    }

    pub fn x_bar(&self) -> &[f64] {
        &self.x_bar
    }

    /// `A = dx/dxi` at the expansion point.
    pub fn jacobian(&self) -> &dyn ImplicitOperator {
        self.jac.as_ref()
    }

    pub fn jacobian_arc(&self) -> Arc<dyn ImplicitOperator> {
        self.jac.clone()
    }

    /// `M(xi_bar)` as an operator.
    pub fn metric(&self) -> MetricOperator {
        MetricOperator {
            jac: Box::new(self.jac.clone()),
        }
    }
}

/// `g~(xi; xi_bar) = xi - xi_bar + A^T (x(xi) - x_bar)`.
pub fn gtilde(model: &Model, xi: &[f64], ep: &ExpansionPoint) -> Result<Vec<f64>> {
    model.check_input(xi)?;
    let x = model.xi_transform.apply(xi)?;
    Ok(gtilde_from_x(xi, &x, ep))
}

fn gtilde_from_x(xi: &[f64], x: &[f64], ep: &ExpansionPoint) -> Vec<f64> {
    let mut out = ep.jac.apply_adjoint(&sub(x, &ep.x_bar));
    for ((o, a), b) in out.iter_mut().zip(xi).zip(&ep.xi_bar) {
        *o += a - b;
    }
    out
}

/// `g~` at `xi` together with its Jacobian `1 + A^T J(xi)`.
pub fn gtilde_linearized(
    model: &Model,
    xi: &[f64],
    ep: &ExpansionPoint,
) -> Result<(Vec<f64>, GtildeJacobian)> {
    model.check_input(xi)?;
    let (x, jac) = model.xi_transform.linearize(xi)?;
    let value = gtilde_from_x(xi, &x, ep);
    Ok((
        value,
        GtildeJacobian {
            a: ep.jac.clone(),
            j: jac,
        },
    ))
}

/// `v -> v + A^T J v`.
pub struct GtildeJacobian {
    a: Arc<dyn ImplicitOperator>,
    j: OperatorRef,
}

impl ImplicitOperator for GtildeJacobian {
    fn dim_in(&self) -> usize {
        self.j.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.j.dim_in()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.a.apply_adjoint(&self.j.apply(v));
        crate::linalg::vector::add_assign(&mut out, v);
        out
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.j.apply_adjoint(&self.a.apply(u));
        crate::linalg::vector::add_assign(&mut out, u);
        out
    }
}

#[cfg(test)]
mod tests;
