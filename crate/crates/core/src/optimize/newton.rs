//! Inexact Newton-CG with backtracking Armijo line search.

use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, dot, norm};
use crate::linalg::{cg_solve, CgConfig, OperatorRef};

/// Value, gradient and an SPD curvature operator at one point.
pub struct Evaluation {
    pub value: f64,
    pub grad: Vec<f64>,
    pub curvature: OperatorRef,
}

pub trait Objective: Sync {
    fn dim(&self) -> usize;
    /// Objective value only; used by the line search.
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonCgConfig {
    pub max_iter: usize,
    /// Stop when `|grad| <= grad_tol * sqrt(dim)`.
    pub grad_tol: f64,
    /// Stop when an accepted step changes the value by less than
    /// `rel_energy_tol * |value|`.
    pub rel_energy_tol: f64,
    /// Stop as soon as the value falls to this level.
    pub value_target: Option<f64>,
    pub cg: CgConfig,
    pub armijo_c: f64,
    pub max_halvings: usize,
}

impl Default for NewtonCgConfig {
    fn default() -> Self {
        NewtonCgConfig {
            max_iter: 50,
            grad_tol: 1e-10,
            rel_energy_tol: 1e-10,
            value_target: None,
            cg: CgConfig::with_tol(1e-4, 100),
            armijo_c: 1e-4,
            max_halvings: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub value: f64,
    pub step_norm: f64,
    pub cg_iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Gradient,
    EnergyChange,
    Target,
    IterationCap,
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub trace: Vec<TraceEntry>,
    pub stop: StopReason,
}

impl NewtonResult {
    pub fn converged(&self) -> bool {
        !matches!(self.stop, StopReason::IterationCap | StopReason::LineSearchFailed)
    }
}

/// Minimizes `obj` from `x0`. Accepted values never increase. A failed line
/// search ends the run with the best iterate and
/// [`StopReason::LineSearchFailed`]; see [`NewtonResult::converged`].
pub fn newton_cg(obj: &dyn Objective, x0: &[f64], cfg: &NewtonCgConfig) -> Result<NewtonResult> {
    let dim = obj.dim();
    if x0.len() != dim {
        return Err(Error::mismatch("newton_cg start", dim, x0.len()));
    }
    let mut x = x0.to_vec();
    let mut eval = obj.evaluate(&x)?;
    if !eval.value.is_finite() {
        return Err(Error::NonFiniteValue("objective at start point".into()));
    }
    let mut trace = Vec::new();
    let gtol = cfg.grad_tol * (dim as f64).sqrt();
    let finish = |x: Vec<f64>, e: &Evaluation, trace, stop| NewtonResult {
        grad_norm: norm(&e.grad),
        x,
        value: e.value,
        trace,
        stop,
    };

    for _ in 0..cfg.max_iter {
        if cfg.value_target.is_some_and(|t| eval.value <= t) {
            return Ok(finish(x, &eval, trace, StopReason::Target));
        }
        if norm(&eval.grad) <= gtol {
            return Ok(finish(x, &eval, trace, StopReason::Gradient));
        }
        let neg_grad: Vec<f64> = eval.grad.iter().map(|g| -g).collect();
        let sol = cg_solve(eval.curvature.as_ref(), &neg_grad, &cfg.cg)?;
        let mut dir = sol.x;
        let mut slope = dot(&dir, &eval.grad);
        if !(slope < 0.0) {
            // Curvature solve gave no descent direction; fall back to the
            // steepest descent.
            dir = neg_grad;
            slope = dot(&dir, &eval.grad);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let mut trial = x.clone();
            axpy(t, &dir, &mut trial);
            match obj.value(&trial) {
                Ok(v) if v.is_finite() && v <= eval.value + cfg.armijo_c * t * slope => {
                    accepted = Some(trial);
                    break;
                }
                Ok(_) | Err(Error::DomainError(_)) | Err(Error::NonFiniteValue(_)) => {}
                Err(e) => return Err(e),
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            log::debug!("line search failed after {} halvings", cfg.max_halvings);
            return Ok(finish(x, &eval, trace, StopReason::LineSearchFailed));
        };
        let new_eval = obj.evaluate(&next)?;
        let step_norm = t * norm(&dir);
        let change = eval.value - new_eval.value;
        trace.push(TraceEntry {
            value: new_eval.value,
            step_norm,
            cg_iterations: sol.iterations,
        });
        x = next;
        eval = new_eval;
        if change.abs() <= cfg.rel_energy_tol * eval.value.abs() {
            return Ok(finish(x, &eval, trace, StopReason::EnergyChange));
        }
    }
    let stop = if cfg.value_target.is_some_and(|t| eval.value <= t) {
        StopReason::Target
    } else if norm(&eval.grad) <= gtol {
        StopReason::Gradient
    } else {
        StopReason::IterationCap
    };
    Ok(finish(x, &eval, trace, stop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{DenseMatrix, DenseOperator, FnOperator};

    struct Quadratic {
        a: DenseMatrix,
        b: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.b.len()
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            let ax = crate::linalg::dense::mat_vec(&self.a, x);
            Ok(0.5 * dot(x, &ax) - dot(&self.b, x))
        }
        fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
            let ax = crate::linalg::dense::mat_vec(&self.a, x);
            Ok(Evaluation {
                value: 0.5 * dot(x, &ax) - dot(&self.b, x),
                grad: ax.iter().zip(&self.b).map(|(a, b)| a - b).collect(),
                curvature: Box::new(DenseOperator(self.a.clone())),
            })
        }
    }

    struct Quartic;

    impl Objective for Quartic {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok((x[0] - 2.0).powi(4))
        }
        fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
            let d = x[0] - 2.0;
            let h = (12.0 * d * d).max(1e-12);
            Ok(Evaluation {
                value: d.powi(4),
                grad: vec![4.0 * d.powi(3)],
                curvature: Box::new(FnOperator::symmetric(1, move |v: &[f64]| vec![h * v[0]])),
            })
        }
    }

    #[test]
    fn quadratic_in_one_step() {
        let a = DenseMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let q = Quadratic {
            a,
            b: vec![1.0, -2.0, 0.5],
        };
        let cfg = NewtonCgConfig {
            cg: CgConfig::with_tol(1e-14, 10),
            ..Default::default()
        };
        let r = newton_cg(&q, &[0.0; 3], &cfg).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert!(r.converged());
    }

    #[test]
    fn quartic_minimum() {
        let r = newton_cg(&Quartic, &[0.0], &NewtonCgConfig::default()).unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-3, "{:?}", r.x);
        for w in r.trace.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
    }

    #[test]
    fn target_stops_early() {
        let cfg = NewtonCgConfig {
            value_target: Some(1.0),
            ..Default::default()
        };
        let r = newton_cg(&Quartic, &[0.0], &cfg).unwrap();
        assert_eq!(r.stop, StopReason::Target);
        assert!(r.value <= 1.0);
    }
}
