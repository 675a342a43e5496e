//! Differentiable maps with hand-coded tangent and cotangent actions.
//!
//! Every generative model is a composition of the primitives in
//! [`primitives`]. A map is linearized at a point into its value and a
//! Jacobian operator; `jvp`/`vjp` are thin conveniences on top of that.

mod check;
pub mod primitives;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::vector::{check_finite, check_len};
use crate::linalg::{ImplicitOperator, OperatorRef};

pub use check::{fd_check, fd_check_default, FdReport};
pub use primitives::*;

pub trait DifferentiableMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;

    /// Human-readable description used in diagnostics.
    fn name(&self) -> String;

    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>>;

    /// Value and Jacobian at `xi`.
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)>;
}

pub type MapRef = Arc<dyn DifferentiableMap>;

/// Validates the input and evaluates the map.
pub fn apply(map: &dyn DifferentiableMap, xi: &[f64]) -> Result<Vec<f64>> {
    check_len("apply", map.dim_in(), xi)?;
    check_finite("apply input", xi)?;
    let out = map.apply(xi)?;
    check_finite(&map.name(), &out)?;
    Ok(out)
}

pub fn jvp(map: &dyn DifferentiableMap, xi: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_len("jvp", map.dim_in(), xi)?;
    check_len("jvp tangent", map.dim_in(), v)?;
    let (_, jac) = map.linearize(xi)?;
    Ok(jac.apply(v))
}

pub fn vjp(map: &dyn DifferentiableMap, xi: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    check_len("vjp", map.dim_in(), xi)?;
    check_len("vjp cotangent", map.dim_out(), u)?;
    let (_, jac) = map.linearize(xi)?;
    Ok(jac.apply_adjoint(u))
}

/// `outer ∘ inner`.
pub fn compose(outer: MapRef, inner: MapRef) -> Result<MapRef> {
    if outer.dim_in() != inner.dim_out() {
        return Err(Error::mismatch(
            format!("compose({}, {})", outer.name(), inner.name()),
            outer.dim_in(),
            inner.dim_out(),
        ));
    }
    Ok(Arc::new(Composition { outer, inner }))
}

/// Chains a sequence of maps, applied left to right.
pub fn chain(maps: &[MapRef]) -> Result<MapRef> {
    let mut it = maps.iter().cloned();
    let first = it
        .next()
        .ok_or_else(|| Error::BadShape("empty map chain".into()))?;
    it.try_fold(first, |acc, next| compose(next, acc))
}

struct Composition {
    outer: MapRef,
    inner: MapRef,
}

/// Product of two linear operators, `a ∘ b`.
pub struct ChainOperator {
    pub outer: OperatorRef,
    pub inner: OperatorRef,
}

impl ImplicitOperator for ChainOperator {
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.outer.dim_out()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.outer.apply(&self.inner.apply(v))
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        self.inner.apply_adjoint(&self.outer.apply_adjoint(u))
    }
}

impl DifferentiableMap for Composition {
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.outer.dim_out()
    }
    fn name(&self) -> String {
        format!("{} ∘ {}", self.outer.name(), self.inner.name())
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.outer.apply(&self.inner.apply(xi)?)
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let (mid, inner) = self.inner.linearize(xi)?;
        let (out, outer) = self.outer.linearize(&mid)?;
        Ok((out, Box::new(ChainOperator { outer, inner })))
    }
}
