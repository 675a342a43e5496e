//! Reference Hamiltonian Monte Carlo with a unit mass matrix.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::Model;
use crate::linalg::vector::{axpy, norm_sq};
use crate::linalg::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct HmcConfig {
    pub chains: usize,
    /// Kept samples per chain after burn-in and thinning.
    pub samples_per_chain: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub step_size: f64,
    pub n_leapfrog: usize,
    /// Adapt the step size during burn-in towards this acceptance rate.
    pub target_accept: Option<f64>,
    /// Standard deviation of the chain starting points.
    pub init_scale: f64,
}

impl Default for HmcConfig {
    fn default() -> Self {
        HmcConfig {
            chains: 4,
            samples_per_chain: 1000,
            burn_in: 500,
            thin: 1,
            step_size: 0.05,
            n_leapfrog: 20,
            target_accept: Some(0.8),
            init_scale: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HmcResult {
    pub samples: Vec<Vec<f64>>,
    pub acceptance: f64,
    /// Final step size per chain.
    pub step_sizes: Vec<f64>,
    /// Largest absolute energy error of any kept trajectory.
    pub max_energy_error: f64,
}

struct Trajectory {
    position: Vec<f64>,
    accept_prob: f64,
    energy_error: f64,
}

fn leapfrog(
    model: &Model,
    start: &[f64],
    h0: f64,
    g0: &[f64],
    step: f64,
    n: usize,
    rng: &mut Rng,
) -> Result<Trajectory> {
    let p0 = rng.standard_normal(start.len());
    let mut x = start.to_vec();
    let mut p = p0.clone();
    let mut g = g0.to_vec();
    let mut h = h0;
    for _ in 0..n {
        axpy(-0.5 * step, &g, &mut p);
        axpy(step, &p, &mut x);
        match model.hamiltonian_grad(&x) {
            Ok((hv, gv)) => {
                h = hv;
                g = gv;
            }
            Err(crate::Error::DomainError(_)) | Err(crate::Error::NonFiniteValue(_)) => {
                return Ok(Trajectory {
                    position: start.to_vec(),
                    accept_prob: 0.0,
                    energy_error: f64::INFINITY,
                })
            }
            Err(e) => return Err(e),
        }
        axpy(-0.5 * step, &g, &mut p);
    }
    let de = (h + 0.5 * norm_sq(&p)) - (h0 + 0.5 * norm_sq(&p0));
    let accept_prob = if de.is_finite() { (-de).exp().min(1.0) } else { 0.0 };
    let u = rng.uniform();
    Ok(Trajectory {
        position: if u < accept_prob { x } else { start.to_vec() },
        accept_prob,
        energy_error: de.abs(),
    })
}

fn run_chain(model: &Model, cfg: &HmcConfig, seed: u64, chain: u64) -> Result<(Vec<Vec<f64>>, f64, f64, f64)> {
    let mut rng = Rng::derive(seed, &[chain]);
    let mut x: Vec<f64> = rng
        .standard_normal(model.prior_dim())
        .into_iter()
        .map(|v| v * cfg.init_scale)
        .collect();
    let (mut h, mut g) = model.hamiltonian_grad(&x)?;
    let mut step = cfg.step_size;
    let mut log_step_avg = step.ln();
    let total = cfg.burn_in + cfg.samples_per_chain * cfg.thin.max(1);
    let mut kept = Vec::with_capacity(cfg.samples_per_chain);
    let mut accepted = 0.0;
    let mut max_de: f64 = 0.0;
    for it in 0..total {
        // Jitter the step size to avoid periodic trajectories.
        let eps = step * (0.9 + 0.2 * rng.uniform());
        let t = leapfrog(model, &x, h, &g, eps, cfg.n_leapfrog, &mut rng)?;
        if t.position != x {
            x = t.position;
            (h, g) = model.hamiltonian_grad(&x)?;
        }
        if it < cfg.burn_in {
            if let Some(target) = cfg.target_accept {
                let rate = 1.0 / (it as f64 + 10.0).powf(0.6);
                step = (step.ln() + rate * (t.accept_prob - target)).exp();
                log_step_avg = 0.9 * log_step_avg + 0.1 * step.ln();
                if it + 1 == cfg.burn_in {
                    step = log_step_avg.exp();
                }
            }
            continue;
        }
        accepted += t.accept_prob;
        if t.energy_error.is_finite() {
            max_de = max_de.max(t.energy_error);
        }
        if (it - cfg.burn_in).is_multiple_of(cfg.thin.max(1)) {
            kept.push(x.clone());
        }
    }
    let n_post = (total - cfg.burn_in).max(1) as f64;
    Ok((kept, accepted / n_post, step, max_de))
}

/// Independent chains run in parallel, each from its own stream of
/// `seed`. Samples are concatenated in chain order.
pub fn hmc_reference(model: &Model, cfg: &HmcConfig, seed: u64) -> Result<HmcResult> {
    let chains: Vec<_> = (0..cfg.chains as u64)
        .into_par_iter()
        .map(|c| run_chain(model, cfg, seed, c))
        .collect::<Result<_>>()?;
    let mut samples = Vec::new();
    let mut acc = 0.0;
    let mut steps = Vec::new();
    let mut max_de: f64 = 0.0;
    for (s, a, st, de) in chains {
        samples.extend(s);
        acc += a;
        steps.push(st);
        max_de = max_de.max(de);
    }
    let acceptance = acc / cfg.chains.max(1) as f64;
    if acceptance < 0.2 {
        log::warn!("HMC acceptance rate {acceptance:.3} is low");
    }
    Ok(HmcResult {
        samples,
        acceptance,
        step_sizes: steps,
        max_energy_error: max_de,
    })
}
