//! Per-family energies, gradients, Fisher metrics and metric-root
//! transforms.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::diffmap::{self, DifferentiableMap, MapRef, ScalarFunction};
use crate::error::{Error, Result};
use crate::linalg::{ImplicitOperator, OperatorRef};

/// Poisson rates below this value are clamped inside the energy.
pub const POISSON_RATE_FLOOR: f64 = 1e-12;

static POISSON_FLOOR_HITS: AtomicU64 = AtomicU64::new(0);

/// Number of times a Poisson rate was clamped to the floor since start-up.
pub fn poisson_floor_hits() -> u64 {
    POISSON_FLOOR_HITS.load(Ordering::Relaxed)
}

fn floor_rate(s: f64) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::DomainError(format!("negative Poisson rate {s}")));
    }
    if s < POISSON_RATE_FLOOR {
        POISSON_FLOOR_HITS.fetch_add(1, Ordering::Relaxed);
        log::warn!("Poisson rate {s:e} clamped to {POISSON_RATE_FLOOR:e}");
        Ok(POISSON_RATE_FLOOR)
    } else {
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Gaussian noise with diagonal covariance `noise_var`.
    Normal { noise_var: Vec<f64> },
    /// Counts with rate `s'`.
    Poisson,
    /// Inverse-gamma energy in `s'` with shape `alpha`; the data vector
    /// holds the scale `q` per point.
    InverseGamma { alpha: Vec<f64> },
    /// Unit-scale Student-t on the residual `d - s'` with `theta` degrees
    /// of freedom.
    StudentT { theta: f64 },
    /// Binary data with success probability `s'`.
    Bernoulli,
    /// Gaussian with unknown mean and variance. `s'` holds all means
    /// followed by all variances.
    VariableNoiseNormal,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Normal { .. } => "normal",
            Family::Poisson => "poisson",
            Family::InverseGamma { .. } => "inverse-gamma",
            Family::StudentT { .. } => "student-t",
            Family::Bernoulli => "bernoulli",
            Family::VariableNoiseNormal => "variable-noise-normal",
        }
    }

    /// Length of `s'` for `n` data points.
    pub fn input_dim(&self, n: usize) -> usize {
        match self {
            Family::VariableNoiseNormal => 2 * n,
            _ => n,
        }
    }

    pub(crate) fn validate(&self, data: &[f64]) -> Result<()> {
        let n = data.len();
        if n == 0 {
            return Err(Error::BadData("empty data vector".into()));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::BadData(format!("non-finite datum {v}")));
        }
        match self {
            Family::Normal { noise_var } => {
                if noise_var.len() != n {
                    return Err(Error::mismatch("normal noise variance", n, noise_var.len()));
                }
                if noise_var.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::BadData("noise variance must be positive".into()));
                }
            }
            Family::Poisson => {
                if data.iter().any(|d| *d < 0.0 || d.fract() != 0.0) {
                    return Err(Error::BadData("Poisson data must be nonnegative integers".into()));
                }
            }
            Family::InverseGamma { alpha } => {
                if alpha.len() != n {
                    return Err(Error::mismatch("inverse-gamma shape", n, alpha.len()));
                }
                if alpha.iter().chain(data).any(|v| !(*v > 0.0)) {
                    return Err(Error::BadData("inverse-gamma shape and scale must be positive".into()));
                }
            }
            Family::StudentT { theta } => {
                if !(*theta > 0.0) || !theta.is_finite() {
                    return Err(Error::BadData(format!("degrees of freedom {theta}")));
                }
            }
            Family::Bernoulli => {
                if data.iter().any(|d| *d != 0.0 && *d != 1.0) {
                    return Err(Error::BadData("Bernoulli data must be 0 or 1".into()));
                }
            }
            Family::VariableNoiseNormal => {}
        }
        Ok(())
    }

    /// Energy and gradient with respect to `s'`, constants dropped.
    pub(crate) fn energy_grad(&self, data: &[f64], s: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut e = 0.0;
        let mut g = vec![0.0; s.len()];
        match self {
            Family::Normal { noise_var } => {
                for i in 0..data.len() {
                    let r = s[i] - data[i];
                    e += 0.5 * r * r / noise_var[i];
                    g[i] = r / noise_var[i];
                }
            }
            Family::Poisson => {
                for i in 0..data.len() {
                    let l = floor_rate(s[i])?;
                    e += l - data[i] * l.ln();
                    g[i] = 1.0 - data[i] / l;
                }
            }
            Family::InverseGamma { alpha } => {
                for i in 0..data.len() {
                    let t = positive(s[i], "inverse-gamma")?;
                    let a1 = alpha[i] + 1.0;
                    e += a1 * t.ln() + data[i] / t;
                    g[i] = a1 / t - data[i] / (t * t);
                }
            }
            Family::StudentT { theta } => {
                for i in 0..data.len() {
                    let r = s[i] - data[i];
                    let q = 1.0 + r * r / theta;
                    e += 0.5 * (theta + 1.0) * q.ln();
                    g[i] = (theta + 1.0) * r / (theta * q);
                }
            }
            Family::Bernoulli => {
                for i in 0..data.len() {
                    let p = s[i];
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::DomainError(format!("Bernoulli probability {p}")));
                    }
                    let d = data[i];
                    e -= d * p.ln() + (1.0 - d) * (1.0 - p).ln();
                    g[i] = -d / p + (1.0 - d) / (1.0 - p);
                }
            }
            Family::VariableNoiseNormal => {
                let n = data.len();
                for i in 0..n {
                    let (m, v) = (s[i], positive(s[n + i], "variance")?);
                    let r = data[i] - m;
                    e += 0.5 * (r * r / v + v.ln());
                    g[i] = -r / v;
                    g[n + i] = 0.5 * (1.0 / v - r * r / (v * v));
                }
            }
        }
        Ok((e, g))
    }

    /// The dropped constant: `-log P(d|s') = energy + constant`.
    pub(crate) fn normalization(&self, data: &[f64]) -> f64 {
        let n = data.len() as f64;
        match self {
            Family::Normal { noise_var } => {
                noise_var.iter().map(|v| 0.5 * (2.0 * PI * v).ln()).sum()
            }
            Family::Poisson => data.iter().map(|d| ln_gamma(d + 1.0)).sum(),
            Family::InverseGamma { alpha } => alpha
                .iter()
                .zip(data)
                .map(|(a, q)| ln_gamma(*a) - a * q.ln())
                .sum(),
            Family::StudentT { theta } => {
                n * (ln_gamma(theta / 2.0) + 0.5 * (theta * PI).ln()
                    - ln_gamma((theta + 1.0) / 2.0))
            }
            Family::Bernoulli => 0.0,
            Family::VariableNoiseNormal => 0.5 * n * (2.0 * PI).ln(),
        }
    }

    /// Diagonal of the Fisher metric in `s'`.
    pub(crate) fn fisher_diag(&self, data: &[f64], s: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            Family::Normal { noise_var } => noise_var.iter().map(|v| 1.0 / v).collect(),
            Family::Poisson => s.iter().map(|&l| Ok(1.0 / floor_rate(l)?)).collect::<Result<_>>()?,
            Family::InverseGamma { alpha } => alpha
                .iter()
                .zip(s)
                .map(|(a, t)| (a + 1.0) / (t * t))
                .collect(),
            Family::StudentT { theta } => vec![(theta + 1.0) / (theta + 3.0); data.len()],
            Family::Bernoulli => s.iter().map(|p| 1.0 / (p * (1.0 - p))).collect(),
            Family::VariableNoiseNormal => {
                let n = data.len();
                let mut out = vec![0.0; 2 * n];
                for i in 0..n {
                    out[i] = 1.0 / s[n + i];
                    out[n + i] = 0.5 / (s[n + i] * s[n + i]);
                }
                out
            }
        })
    }

    /// Metric-root transform `x(s')`.
    pub(crate) fn transform(&self, data: &[f64]) -> MapRef {
        let n = data.len();
        match self {
            Family::Normal { noise_var } => {
                let scale = noise_var.iter().map(|v| 1.0 / v.sqrt()).collect();
                diffmap::affine(scale, vec![0.0; n]).expect("lengths validated")
            }
            Family::Poisson => diffmap::pointwise(n, Arc::new(PoissonRoot)),
            Family::InverseGamma { alpha } => {
                let scale = alpha.iter().map(|a| (a + 1.0).sqrt()).collect();
                let outer = diffmap::affine(scale, vec![0.0; n]).expect("lengths validated");
                diffmap::compose(outer, diffmap::log(n)).expect("dims match")
            }
            Family::StudentT { theta } => {
                diffmap::affine_scalar(n, ((theta + 1.0) / (theta + 3.0)).sqrt(), 0.0)
            }
            Family::Bernoulli => diffmap::pointwise(n, Arc::new(BernoulliRoot)),
            Family::VariableNoiseNormal => Arc::new(MeanVarianceRoot {
                data: data.to_vec(),
            }),
        }
    }
}

fn positive(t: f64, what: &str) -> Result<f64> {
    if t > 0.0 {
        Ok(t)
    } else {
        Err(Error::DomainError(format!("{what} argument {t} must be positive")))
    }
}

/// `2 sqrt(s')`, with the rate floor applied.
struct PoissonRoot;

impl ScalarFunction for PoissonRoot {
    fn name(&self) -> String {
        "2sqrt".into()
    }
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let l = floor_rate(t)?;
        let r = l.sqrt();
        Ok((2.0 * r, 1.0 / r))
    }
}

/// `2 arcsin(sqrt(s'))`.
struct BernoulliRoot;

impl ScalarFunction for BernoulliRoot {
    fn name(&self) -> String {
        "2asin_sqrt".into()
    }
    fn eval(&self, p: f64) -> Result<(f64, f64)> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::DomainError(format!("Bernoulli probability {p}")));
        }
        Ok((2.0 * p.sqrt().asin(), 1.0 / (p * (1.0 - p)).sqrt()))
    }
}

/// `x = ((d - m)/sqrt(v), log(v)/2)` per data point.
struct MeanVarianceRoot {
    data: Vec<f64>,
}

struct MeanVarianceJacobian {
    // Per point: dx1/dm, dx1/dv, dx2/dv.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ImplicitOperator for MeanVarianceJacobian {
    fn dim_in(&self) -> usize {
        2 * self.a.len()
    }
    fn dim_out(&self) -> usize {
        2 * self.a.len()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.a.len();
        let mut out = vec![0.0; 2 * n];
        for i in 0..n {
            out[i] = self.a[i] * v[i] + self.b[i] * v[n + i];
            out[n + i] = self.c[i] * v[n + i];
        }
        out
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let n = self.a.len();
        let mut out = vec![0.0; 2 * n];
        for i in 0..n {
            out[i] = self.a[i] * u[i];
            out[n + i] = self.b[i] * u[i] + self.c[i] * u[n + i];
        }
        out
    }
}

impl DifferentiableMap for MeanVarianceRoot {
    fn dim_in(&self) -> usize {
        2 * self.data.len()
    }
    fn dim_out(&self) -> usize {
        2 * self.data.len()
    }
    fn name(&self) -> String {
        "mean_variance_root".into()
    }
    fn apply(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.linearize(s)?.0)
    }
    fn linearize(&self, s: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let n = self.data.len();
        let mut x = vec![0.0; 2 * n];
        let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let v = positive(s[n + i], "variance")?;
            let sv = v.sqrt();
            let r = self.data[i] - s[i];
            x[i] = r / sv;
            x[n + i] = 0.5 * v.ln();
            a[i] = -1.0 / sv;
            b[i] = -0.5 * r / (v * sv);
            c[i] = 0.5 / v;
        }
        Ok((x, Box::new(MeanVarianceJacobian { a, b, c })))
    }
}
