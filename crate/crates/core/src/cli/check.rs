//! The `check` subcommand: derivative, adjoint and metric self-tests on
//! every shipped model.

use serde::Serialize;

use crate::cfmodel::{make_example, EXAMPLE_NAMES};
use crate::diffmap::fd_check_default;
use crate::error::Result;
use crate::geometry::{DenseTransform, ExpansionPoint};
use crate::inference::{grid_kl, GridDensity, GridSpec};
use crate::linalg::{materialize, Rng};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn record(out: &mut Vec<CheckResult>, name: String, passed: bool, detail: String) {
    out.push(CheckResult { name, passed, detail });
}

fn small_size(name: &str) -> Option<usize> {
    match name {
        "lognormal-process" => Some(32),
        "poisson-separation" => Some(8),
        "linear" => Some(6),
        _ => None,
    }
}

/// Runs the self-test suite with random probes drawn from `seed`.
pub fn run_checks(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut rng = Rng::derive(seed, &[0xc4ec]);
    for name in EXAMPLE_NAMES {
        let bundle = make_example(name, small_size(name), seed)?;
        let model = &bundle.model;
        let xi: Vec<f64> = rng
            .standard_normal(model.prior_dim())
            .iter()
            .map(|v| 0.5 * v)
            .collect();
        let fwd = fd_check_default(model.forward().as_ref(), &xi, &mut rng)?;
        record(
            &mut out,
            format!("{name}: forward derivatives"),
            fwd.passed(),
            format!("tangent {:.1e}, adjoint {:.1e}", fwd.max_rel_error_tangent, fwd.max_rel_error_adjoint),
        );
        let s = model.forward().apply(&xi)?;
        let tr = model.likelihood().transform()?;
        let lik = fd_check_default(tr.as_ref(), &s, &mut rng)?;
        record(
            &mut out,
            format!("{name}: likelihood transform"),
            lik.passed(),
            format!("tangent {:.1e}, adjoint {:.1e}", lik.max_rel_error_tangent, lik.max_rel_error_adjoint),
        );
        if model.prior_dim() <= 2 {
            let ep = ExpansionPoint::new(model, &xi)?;
            let t = DenseTransform::new(&ep)?;
            let (_, j) = t.linearize(model, &xi, &ep)?;
            let m = materialize(&ep.metric(), xi.len())?;
            let jinv = j
                .clone()
                .try_inverse()
                .ok_or(crate::Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?;
            let pulled = jinv.transpose() * m * &jinv;
            let err = (pulled - crate::linalg::DenseMatrix::identity(xi.len(), xi.len())).amax();
            record(
                &mut out,
                format!("{name}: metric is identity in transformed coordinates"),
                err <= 1e-8,
                format!("max deviation {err:.1e}"),
            );
        }
    }
    let spec = GridSpec::square(1, 12.0, 2048)?;
    let p = GridDensity::from_log_fn(spec.clone(), |x| Ok(-0.5 * x[0] * x[0]))?;
    let q = GridDensity::from_log_fn(spec, |x| Ok(-0.25 * (x[0] - 1.0).powi(2)))?;
    let (kl, _) = grid_kl(&p, &q)?;
    let (mu, var) = (1.0, 2.0f64);
    let exact = 0.5 * (1.0 / var + mu * mu / var - 1.0 + var.ln());
    record(
        &mut out,
        "grid KL of two Gaussians".into(),
        (kl - exact).abs() < 1e-4,
        format!("{kl:.6} vs {exact:.6}"),
    );
    Ok(out)
}
