//! Plain (unpreconditioned) conjugate gradient for SPD implicit operators.

use super::operator::ImplicitOperator;
use super::vector::{all_finite, axpy, dot, norm};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgConfig {
    /// Relative residual target `|Ax - b| <= tol |b|`.
    pub tol: f64,
    /// Iteration cap; `None` means `min(10 dim, 2000)`.
    pub max_iter: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            tol: 1e-6,
            max_iter: None,
        }
    }
}

impl CgConfig {
    pub fn with_tol(tol: f64, max_iter: usize) -> Self {
        CgConfig {
            tol,
            max_iter: Some(max_iter),
        }
    }

    pub fn iteration_cap(&self, dim: usize) -> usize {
        self.max_iter.unwrap_or_else(|| (10 * dim).min(2000)).max(1)
    }
}

#[derive(Clone, Debug)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Final relative residual of the returned iterate.
    pub residual: f64,
}

impl CgSolution {
    /// Turns a non-converged solve into an error.
    pub fn require_converged(self, context: &str) -> Result<Vec<f64>> {
        if self.converged {
            Ok(self.x)
        } else {
            Err(Error::NotConverged {
                context: context.to_string(),
                residual: self.residual,
            })
        }
    }
}

/// Solves `A x = b` starting from zero. Returns the best iterate seen when
/// the cap is reached, with `converged = false`.
pub fn cg_solve(op: &dyn ImplicitOperator, b: &[f64], cfg: &CgConfig) -> Result<CgSolution> {
    let n = b.len();
    if op.dim_in() != n || op.dim_out() != n {
        return Err(Error::mismatch("cg_solve", op.dim_in(), n));
    }
    if !all_finite(b) {
        return Err(Error::NonFiniteValue("cg_solve right-hand side".into()));
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            converged: true,
            iterations: 0,
            residual: 0.0,
        });
    }
    let cap = cfg.iteration_cap(n);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut best = (x.clone(), 1.0);

    for it in 1..=cap {
        let ap = op.apply(&p);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::NonFiniteValue("cg_solve iterate".into()));
        }
        if pap <= 0.0 {
            // Loss of positive definiteness (or exact breakdown): stop here.
            return Ok(CgSolution {
                x: best.0,
                converged: false,
                iterations: it,
                residual: best.1,
            });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() || !all_finite(&x) {
            return Err(Error::NonFiniteValue("cg_solve iterate".into()));
        }
        let rel = rr_new.sqrt() / bnorm;
        if rel < best.1 {
            best = (x.clone(), rel);
        }
        if rel <= cfg.tol {
            return Ok(CgSolution {
                x,
                converged: true,
                iterations: it,
                residual: rel,
            });
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Ok(CgSolution {
        x: best.0,
        converged: false,
        iterations: cap,
        residual: best.1,
    })
}
