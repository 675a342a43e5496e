//! Residual samplers: the geoVI inversion of `g~` and its linearized (MGVI)
//! limit.

use super::{gtilde, gtilde_linearized, ExpansionPoint, GtildeJacobian, Model};
use crate::error::{Error, Result};
use crate::linalg::vector::{norm, norm_sq, sub};
use crate::linalg::{cg_solve, CgConfig, ImplicitOperator, Rng};
use crate::optimize::{newton_cg, Evaluation, NewtonCgConfig, Objective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartMode {
    /// Start the inversion at `xi_bar + eta_1`.
    PriorDraw,
    /// Start at the MGVI residual, the solution of `M(xi_bar) r = z`.
    Linearized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Inversion succeeds when `|g~(xi) - z| <= tol * max(|z|, 1)`.
    pub tol: f64,
    /// Gauss-Newton iteration cap for the inversion.
    pub max_iter: usize,
    /// An inversion that stops above `tol` is still accepted when
    /// `|g~(xi) - z| <= accept_tol * max(|z|, 1)`. Equal to `tol` means
    /// strict.
    pub accept_tol: f64,
    pub start: StartMode,
    /// CG settings of the MGVI solve and the linearized start.
    pub cg: CgConfig,
    /// CG settings inside each Gauss-Newton step.
    pub inner_cg: CgConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            tol: 1e-6,
            max_iter: 50,
            accept_tol: 1e-6,
            start: StartMode::Linearized,
            cg: CgConfig::default(),
            inner_cg: CgConfig::with_tol(1e-6, 500),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidualDraw {
    pub r: Vec<f64>,
    /// `|z - g~(xi_bar + r)|^2 / 2` (zero for MGVI draws).
    pub misfit: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct Inversion {
    pub xi: Vec<f64>,
    pub misfit: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Draws `eta_1 ~ N(0, 1)` in latent space and `eta_2 ~ N(0, 1)` in data
/// space, returning `(eta_1, z = eta_1 + A^T eta_2)`. Then `z ~ N(0, M)`.
pub fn sample_z(ep: &ExpansionPoint, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let a = ep.jacobian();
    let eta1 = rng.standard_normal(a.dim_in());
    let eta2 = rng.standard_normal(a.dim_out());
    let mut z = a.apply_adjoint(&eta2);
    crate::linalg::vector::add_assign(&mut z, &eta1);
    (eta1, z)
}

struct InversionObjective<'a> {
    model: &'a Model,
    ep: &'a ExpansionPoint,
    z: &'a [f64],
}

/// `J_g^T J_g` for the Gauss-Newton step.
struct GaussNewton(GtildeJacobian);

impl ImplicitOperator for GaussNewton {
    fn dim_in(&self) -> usize {
        self.0.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.0.dim_in()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_adjoint(&self.0.apply(v))
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u)
    }
}

impl Objective for InversionObjective<'_> {
    fn dim(&self) -> usize {
        self.z.len()
    }
    fn value(&self, xi: &[f64]) -> Result<f64> {
        let g = gtilde(self.model, xi, self.ep)?;
        Ok(0.5 * norm_sq(&sub(&g, self.z)))
    }
    fn evaluate(&self, xi: &[f64]) -> Result<Evaluation> {
        let (g, jac) = gtilde_linearized(self.model, xi, self.ep)?;
        let res = sub(&g, self.z);
        Ok(Evaluation {
            value: 0.5 * norm_sq(&res),
            grad: jac.apply_adjoint(&res),
            curvature: Box::new(GaussNewton(jac)),
        })
    }
}

/// Solves `g~(xi; xi_bar) = z` by Gauss-Newton from `start`.
pub fn invert_gtilde(
    model: &Model,
    ep: &ExpansionPoint,
    z: &[f64],
    start: &[f64],
    cfg: &SamplerConfig,
) -> Result<Inversion> {
    let scale = cfg.tol * norm(z).max(1.0);
    let target = 0.5 * scale * scale;
    let ncfg = NewtonCgConfig {
        max_iter: cfg.max_iter,
        grad_tol: 0.0,
        rel_energy_tol: 0.0,
        value_target: Some(target),
        cg: cfg.inner_cg,
        ..Default::default()
    };
    let obj = InversionObjective { model, ep, z };
    let res = newton_cg(&obj, start, &ncfg)?;
    let accept = cfg.accept_tol.max(cfg.tol) * norm(z).max(1.0);
    log::debug!(
        "inversion: {:?} after {} steps, misfit {:.3e} (target {:.3e})",
        res.stop,
        res.trace.len(),
        res.value,
        target
    );
    Ok(Inversion {
        converged: res.value <= 0.5 * accept * accept,
        misfit: res.value,
        iterations: res.trace.len(),
        xi: res.x,
    })
}

fn mgvi_solve(ep: &ExpansionPoint, z: &[f64], cg: &CgConfig) -> Result<Vec<f64>> {
    cg_solve(&ep.metric(), z, cg)?.require_converged("metric solve for residual")
}

fn geo_residual(
    model: &Model,
    ep: &ExpansionPoint,
    eta1: &[f64],
    z: &[f64],
    cfg: &SamplerConfig,
) -> Result<ResidualDraw> {
    let r0 = match cfg.start {
        StartMode::PriorDraw => eta1.to_vec(),
        StartMode::Linearized => mgvi_solve(ep, z, &cfg.cg)?,
    };
    let start: Vec<f64> = ep.xi_bar().iter().zip(&r0).map(|(a, b)| a + b).collect();
    let inv = invert_gtilde(model, ep, z, &start, cfg)?;
    if !inv.converged {
        return Err(Error::NotConverged {
            context: "residual inversion".into(),
            residual: inv.misfit,
        });
    }
    Ok(ResidualDraw {
        r: sub(&inv.xi, ep.xi_bar()),
        misfit: inv.misfit,
        iterations: inv.iterations,
    })
}

fn retry_once<T>(mut attempt: impl FnMut() -> Result<T>) -> Result<T> {
    match attempt() {
        Err(e @ (Error::NotConverged { .. } | Error::DomainError(_))) => {
            log::warn!("residual draw failed ({e}); retrying with a fresh draw");
            attempt()
        }
        other => other,
    }
}

/// One geoVI residual (or an antithetic pair sharing `z` up to sign).
/// A failed inversion is retried once with fresh randomness.
pub fn draw_residual(
    model: &Model,
    ep: &ExpansionPoint,
    rng: &mut Rng,
    cfg: &SamplerConfig,
    antithetic: bool,
) -> Result<Vec<ResidualDraw>> {
    retry_once(|| {
        let (eta1, z) = sample_z(ep, rng);
        let mut out = vec![geo_residual(model, ep, &eta1, &z, cfg)?];
        if antithetic {
            let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<f64>>();
            out.push(geo_residual(model, ep, &neg(&eta1), &neg(&z), cfg)?);
        }
        Ok(out)
    })
}

/// One MGVI residual `r ~ N(0, M(xi_bar)^{-1})` (or the pair `r, -r`).
pub fn draw_mgvi_residual(
    ep: &ExpansionPoint,
    rng: &mut Rng,
    cfg: &SamplerConfig,
    antithetic: bool,
) -> Result<Vec<ResidualDraw>> {
    let (_, z) = sample_z(ep, rng);
    let r = mgvi_solve(ep, &z, &cfg.cg)?;
    let mut out = vec![ResidualDraw {
        r: r.clone(),
        misfit: 0.0,
        iterations: 0,
    }];
    if antithetic {
        out.push(ResidualDraw {
            r: r.iter().map(|x| -x).collect(),
            misfit: 0.0,
            iterations: 0,
        });
    }
    Ok(out)
}
