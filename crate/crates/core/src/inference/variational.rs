//! The geoVI loop and its MGVI limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    draw_mgvi_residual, draw_residual, ExpansionPoint, Model, ResidualDraw, SamplerConfig,
};
use crate::linalg::vector::{add, norm, sub};
use crate::linalg::Rng;
use crate::optimize::{newton_cg, NewtonCgConfig, SampledKl};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Geovi,
    Mgvi,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Geovi => "geovi",
            Method::Mgvi => "mgvi",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalConfig {
    /// Residual draws per outer iteration (pairs when antithetic).
    pub n_draws: usize,
    pub antithetic: bool,
    /// Final sample count (rounded up to even when antithetic).
    pub n_final: usize,
    pub max_outer: usize,
    /// Converged when the relative KL change is below this...
    pub kl_rel_tol: f64,
    /// ...and the shift update is below `shift_tol * sqrt(dim)`.
    pub shift_tol: f64,
    /// Standard deviation of the random initial shift.
    pub init_scale: f64,
    /// Outer iterations of a geoVI run that use linearized residuals
    /// before switching to the inversion. Far from the posterior `g~` is
    /// often not invertible over the range of the draws.
    pub warmup: usize,
    pub newton: NewtonCgConfig,
    pub sampler: SamplerConfig,
}

impl Default for VariationalConfig {
    fn default() -> Self {
        VariationalConfig {
            n_draws: 4,
            antithetic: true,
            n_final: 100,
            max_outer: 15,
            kl_rel_tol: 1e-3,
            shift_tol: 1e-2,
            init_scale: 1.0,
            warmup: 0,
            newton: NewtonCgConfig {
                max_iter: 10,
                grad_tol: 1e-8,
                rel_energy_tol: 1e-9,
                ..Default::default()
            },
            sampler: SamplerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterStep {
    pub kl: f64,
    pub shift_norm: f64,
    pub newton_steps: usize,
    pub max_misfit: f64,
    pub inversion_steps: usize,
    pub failed_draws: usize,
}

/// Result of a geoVI or MGVI run.
#[derive(Clone, Debug)]
pub struct ApproximationState {
    pub method: Method,
    /// Final shift `m`, which is also the last expansion point.
    pub mean: Vec<f64>,
    /// Residuals `r_i`; antithetic partners are adjacent.
    pub residuals: Vec<Vec<f64>>,
    pub antithetic: bool,
    pub trace: Vec<OuterStep>,
    pub converged: bool,
}

impl ApproximationState {
    /// Posterior samples `m + r_i`.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        self.residuals.iter().map(|r| add(&self.mean, r)).collect()
    }

    pub fn kl_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|t| t.kl).collect()
    }

    /// Per-coordinate sample mean and standard deviation.
    pub fn summary(&self) -> (Vec<f64>, Vec<f64>) {
        moments(&self.samples())
    }
}

pub fn moments(samples: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let dim = samples.first().map_or(0, |s| s.len());
    let mut mean = vec![0.0; dim];
    for s in samples {
        crate::linalg::vector::add_assign(&mut mean, s);
    }
    mean.iter_mut().for_each(|v| *v /= n);
    let mut var = vec![0.0; dim];
    for s in samples {
        for ((v, x), m) in var.iter_mut().zip(s).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let std = var
        .into_iter()
        .map(|v| (v / (n - 1.0).max(1.0)).sqrt())
        .collect();
    (mean, std)
}

/// Stream tag of the final sample set, distinct from every loop iteration.
const FINAL_STREAM: u64 = u64::MAX;
const INIT_STREAM: u64 = u64::MAX - 1;

/// Draws `count` residual groups at `ep`, one RNG stream per group. Failed
/// groups are replaced by groups from fresh streams, up to `3 * count`
/// attempts in total; ending with fewer than half of `count` aborts.
/// Returns the draws and the number of failed groups.
pub fn draw_residual_set(
    model: &Model,
    ep: &ExpansionPoint,
    method: Method,
    count: usize,
    antithetic: bool,
    sampler: &SamplerConfig,
    seed: u64,
    stream: u64,
) -> Result<(Vec<ResidualDraw>, usize)> {
    let mut out = Vec::with_capacity(count * 2);
    let mut ok = 0;
    let mut failed = 0;
    let mut next = 0u64;
    let budget = 3 * count as u64;
    while ok < count && next < budget {
        let batch = ((count - ok) as u64).min(budget - next);
        let groups: Vec<Result<Vec<ResidualDraw>>> = (next..next + batch)
            .into_par_iter()
            .map(|i| {
                let mut rng = Rng::derive(seed, &[stream, i]);
                match method {
                    Method::Geovi => draw_residual(model, ep, &mut rng, sampler, antithetic),
                    Method::Mgvi => draw_mgvi_residual(ep, &mut rng, sampler, antithetic),
                }
            })
            .collect();
        next += batch;
        for g in groups {
            match g {
                Ok(draws) => {
                    out.extend(draws);
                    ok += 1;
                }
                Err(e @ (Error::NotConverged { .. } | Error::DomainError(_))) => {
                    failed += 1;
                    log::warn!("residual draw dropped: {e}");
                }
                Err(e) => return Err(e),
            }
        }
    }
    if 2 * ok < count {
        return Err(Error::Aborted(format!(
            "only {ok} of {count} residual draws succeeded in {next} attempts"
        )));
    }
    Ok((out, failed))
}

/// Runs geoVI or MGVI starting from a random shift drawn from `seed`.
pub fn run_variational(
    model: &Model,
    method: Method,
    cfg: &VariationalConfig,
    seed: u64,
) -> Result<ApproximationState> {
    let dim = model.prior_dim();
    let mut init = Rng::derive(seed, &[INIT_STREAM]);
    let m0: Vec<f64> = init
        .standard_normal(dim)
        .into_iter()
        .map(|v| v * cfg.init_scale)
        .collect();
    run_variational_from(model, method, cfg, seed, m0)
}

/// As [`run_variational`] with an explicit starting shift.
pub fn run_variational_from(
    model: &Model,
    method: Method,
    cfg: &VariationalConfig,
    seed: u64,
    m0: Vec<f64>,
) -> Result<ApproximationState> {
    let dim = model.prior_dim();
    if m0.len() != dim {
        return Err(Error::mismatch("initial shift", dim, m0.len()));
    }
    let mut m = m0;
    let mut trace: Vec<OuterStep> = Vec::new();
    let mut converged = false;

    for it in 0..cfg.max_outer {
        let ep = ExpansionPoint::new(model, &m)?;
        let draw_method = if it < cfg.warmup { Method::Mgvi } else { method };
        let (draws, failed) = draw_residual_set(
            model,
            &ep,
            draw_method,
            cfg.n_draws,
            cfg.antithetic,
            &cfg.sampler,
            seed,
            it as u64,
        )?;
        let max_misfit = draws.iter().map(|d| d.misfit).fold(0.0, f64::max);
        let inversion_steps = draws.iter().map(|d| d.iterations).sum();
        let residuals: Vec<Vec<f64>> = draws.into_iter().map(|d| d.r).collect();
        let kl = SampledKl::new(model, residuals)?;
        let res = newton_cg(&kl, &m, &cfg.newton)?;
        let shift_norm = norm(&sub(&res.x, &m));
        m = res.x;
        let step = OuterStep {
            kl: res.value,
            shift_norm,
            newton_steps: res.trace.len(),
            max_misfit,
            inversion_steps,
            failed_draws: failed,
        };
        log::info!(
            "{} iteration {it}: KL {:.6} shift {:.3e} newton {}",
            method.label(),
            step.kl,
            step.shift_norm,
            step.newton_steps
        );
        let prev = trace.last().map(|t| t.kl);
        trace.push(step);
        if let Some(prev) = prev {
            let rel = (prev - res.value).abs() / res.value.abs().max(1e-300);
            if rel < cfg.kl_rel_tol && shift_norm < cfg.shift_tol * (dim as f64).sqrt() {
                converged = true;
                break;
            }
        }
    }

    let ep = ExpansionPoint::new(model, &m)?;
    let groups = if cfg.antithetic {
        cfg.n_final.div_ceil(2)
    } else {
        cfg.n_final
    };
    let (draws, _) = draw_residual_set(
        model,
        &ep,
        method,
        groups,
        cfg.antithetic,
        &cfg.sampler,
        seed,
        FINAL_STREAM,
    )?;
    Ok(ApproximationState {
        method,
        mean: m,
        residuals: draws.into_iter().map(|d| d.r).collect(),
        antithetic: cfg.antithetic,
        trace,
        converged,
    })
}

pub fn run_geovi(model: &Model, cfg: &VariationalConfig, seed: u64) -> Result<ApproximationState> {
    run_variational(model, Method::Geovi, cfg, seed)
}

pub fn run_mgvi(model: &Model, cfg: &VariationalConfig, seed: u64) -> Result<ApproximationState> {
    run_variational(model, Method::Mgvi, cfg, seed)
}
