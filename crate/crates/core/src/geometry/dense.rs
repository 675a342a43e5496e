//! The normalized transformation `g = M(xi_bar)^{-1/2} g~`, dense and
//! therefore for low-dimensional diagnostics only.

use super::{gtilde, gtilde_linearized, ExpansionPoint, Model};
use crate::error::Result;
use crate::linalg::dense::{check_dense_dim, inv_sqrt_spd, mat_vec};
use crate::linalg::{cholesky_logdet, materialize, DenseMatrix};

pub struct DenseTransform {
    inv_sqrt: DenseMatrix,
    logdet_metric: f64,
}

impl DenseTransform {
    pub fn new(ep: &ExpansionPoint) -> Result<Self> {
        let dim = ep.xi_bar().len();
        check_dense_dim(dim)?;
        let m = materialize(&ep.metric(), dim)?;
        Ok(DenseTransform {
            inv_sqrt: inv_sqrt_spd(&m)?,
            logdet_metric: cholesky_logdet(&m)?,
        })
    }

    /// `log |M(xi_bar)|`.
    pub fn logdet_metric(&self) -> f64 {
        self.logdet_metric
    }

    pub fn apply(&self, model: &Model, xi: &[f64], ep: &ExpansionPoint) -> Result<Vec<f64>> {
        Ok(mat_vec(&self.inv_sqrt, &gtilde(model, xi, ep)?))
    }

    /// `g(xi)` and its dense Jacobian `M(xi_bar)^{-1/2} (1 + A^T J(xi))`.
    pub fn linearize(
        &self,
        model: &Model,
        xi: &[f64],
        ep: &ExpansionPoint,
    ) -> Result<(Vec<f64>, DenseMatrix)> {
        let (g, jac) = gtilde_linearized(model, xi, ep)?;
        let jd = materialize(&jac, xi.len())?;
        Ok((mat_vec(&self.inv_sqrt, &g), &self.inv_sqrt * jd))
    }

    /// `g(xi)` with `det(dg/dxi)`.
    pub fn value_and_det(
        &self,
        model: &Model,
        xi: &[f64],
        ep: &ExpansionPoint,
    ) -> Result<(Vec<f64>, f64)> {
        let (g, j) = self.linearize(model, xi, ep)?;
        Ok((g, j.determinant()))
    }
}
