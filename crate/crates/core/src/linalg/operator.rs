//! Implicit linear operators accessed only through matrix-vector products.

use std::sync::Arc;

use super::dense::DenseMatrix;
use super::rng::Rng;
use super::vector::{dot, norm};

/// A linear map `R^dim_in -> R^dim_out` with its adjoint.
///
/// Implementations must be deterministic and safe to apply concurrently.
pub trait ImplicitOperator: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Vec<f64>;
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64>;
}

pub type OperatorRef = Box<dyn ImplicitOperator>;

impl<T: ImplicitOperator + ?Sized> ImplicitOperator for Box<T> {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }
    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (**self).apply(v)
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        (**self).apply_adjoint(u)
    }
}

impl<T: ImplicitOperator + ?Sized> ImplicitOperator for Arc<T> {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }
    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (**self).apply(v)
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        (**self).apply_adjoint(u)
    }
}

impl<T: ImplicitOperator + ?Sized> ImplicitOperator for &T {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }
    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (**self).apply(v)
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        (**self).apply_adjoint(u)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityOperator(pub usize);

impl ImplicitOperator for IdentityOperator {
    fn dim_in(&self) -> usize {
        self.0
    }
    fn dim_out(&self) -> usize {
        self.0
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        u.to_vec()
    }
}

#[derive(Clone, Debug)]
pub struct DenseOperator(pub DenseMatrix);

impl ImplicitOperator for DenseOperator {
    fn dim_in(&self) -> usize {
        self.0.ncols()
    }
    fn dim_out(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = &self.0;
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
            .collect()
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let m = &self.0;
        (0..m.ncols())
            .map(|j| (0..m.nrows()).map(|i| m[(i, j)] * u[i]).sum())
            .collect()
    }
}

type LinearFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Operator from a pair of closures.
pub struct FnOperator {
    dim_in: usize,
    dim_out: usize,
    forward: LinearFn,
    adjoint: LinearFn,
}

impl FnOperator {
    pub fn new<F, G>(dim_in: usize, dim_out: usize, forward: F, adjoint: G) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        FnOperator {
            dim_in,
            dim_out,
            forward: Box::new(forward),
            adjoint: Box::new(adjoint),
        }
    }

    /// Self-adjoint operator from a single closure.
    pub fn symmetric<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static,
    {
        Self::new(dim, dim, f.clone(), f)
    }
}

impl ImplicitOperator for FnOperator {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (self.forward)(v)
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        (self.adjoint)(u)
    }
}

/// Largest normalized deviation `|<Av,u> - <v,A^T u>| / (|Av||u| + 1e-300)`
/// over `probes` random pairs.
pub fn adjoint_probe(op: &dyn ImplicitOperator, rng: &mut Rng, probes: usize) -> f64 {
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let v = rng.standard_normal(op.dim_in());
        let u = rng.standard_normal(op.dim_out());
        let av = op.apply(&v);
        let atu = op.apply_adjoint(&u);
        let lhs = dot(&av, &u);
        let rhs = dot(&v, &atu);
        let scale = norm(&av) * norm(&u) + 1e-300;
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    worst
}
