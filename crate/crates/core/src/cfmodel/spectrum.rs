//! Amplitude spectra from an integrated Wiener process on log-log scale.
//!
//! The latent vector holds five scalar hyperparameter excitations
//! (offset std, fluctuations, slope, flexibility, asperity) followed by one
//! `(eta, xi)` pair per step between consecutive distinct `|k|` values.

use serde::{Deserialize, Serialize};

use crate::diffmap::DifferentiableMap;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseOperator, Grid, OperatorRef};

/// Log-normal prior given by the mean and standard deviation of the
/// variable itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogNormalPrior {
    pub mean: f64,
    pub std: f64,
}

impl LogNormalPrior {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(mean > 0.0 && std > 0.0) {
            return Err(Error::DomainError(format!(
                "log-normal prior needs positive mean and std, got ({mean}, {std})"
            )));
        }
        Ok(LogNormalPrior { mean, std })
    }

    /// Location and scale of the underlying normal.
    pub fn log_params(&self) -> (f64, f64) {
        let s2 = (1.0 + (self.std / self.mean).powi(2)).ln();
        (self.mean.ln() - 0.5 * s2, s2.sqrt())
    }

    pub fn value(&self, xi: f64) -> f64 {
        let (mu, s) = self.log_params();
        (mu + s * xi).exp()
    }

    /// Standard coordinate of `value`.
    pub fn latent(&self, value: f64) -> f64 {
        let (mu, s) = self.log_params();
        (value.ln() - mu) / s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub std: f64,
}

/// Hyperpriors of the spectrum model. `slope` is the exponent of the power
/// spectrum, so amplitudes fall as `|k|^(slope/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    pub offset_std: LogNormalPrior,
    pub fluctuations: LogNormalPrior,
    pub slope: NormalPrior,
    pub flexibility: LogNormalPrior,
    pub asperity: LogNormalPrior,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            offset_std: LogNormalPrior { mean: 0.5, std: 0.1 },
            fluctuations: LogNormalPrior { mean: 1.0, std: 0.5 },
            slope: NormalPrior { mean: -4.0, std: 1.0 },
            flexibility: LogNormalPrior { mean: 0.5, std: 0.3 },
            asperity: LogNormalPrior { mean: 0.5, std: 0.3 },
        }
    }
}

impl SpectrumParams {
    pub fn validate(&self) -> Result<()> {
        for p in [self.offset_std, self.fluctuations, self.flexibility, self.asperity] {
            LogNormalPrior::new(p.mean, p.std)?;
        }
        if !(self.slope.std > 0.0) {
            return Err(Error::DomainError("slope prior std must be positive".into()));
        }
        Ok(())
    }
}

/// Number of scalar hyperparameter latents.
pub const N_SCALARS: usize = 5;

/// Distinct nonzero `|k|` values of a grid and the bin of every mode.
#[derive(Clone, Debug)]
pub struct KBins {
    /// `log|k|` per bin, ascending.
    pub log_k: Vec<f64>,
    /// Modes per bin.
    pub counts: Vec<usize>,
    /// Bin of each flat mode index; `None` for the zero mode.
    pub bin_of: Vec<Option<usize>>,
}

impl KBins {
    pub fn new(grid: &Grid) -> Self {
        let k2: Vec<i64> = (0..grid.size())
            .map(|i| grid.wavevector(i).iter().map(|k| k * k).sum())
            .collect();
        let mut distinct: Vec<i64> = k2.iter().copied().filter(|&v| v > 0).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let mut counts = vec![0; distinct.len()];
        let bin_of = k2
            .iter()
            .map(|&v| {
                (v > 0).then(|| {
                    let b = distinct.binary_search(&v).expect("bin exists");
                    counts[b] += 1;
                    b
                })
            })
            .collect();
        KBins {
            log_k: distinct.iter().map(|&v| 0.5 * (v as f64).ln()).collect(),
            counts,
            bin_of,
        }
    }

    pub fn len(&self) -> usize {
        self.log_k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_k.is_empty()
    }

    /// Latent dimension of the spectrum model on these bins.
    pub fn latent_dim(&self) -> usize {
        N_SCALARS + 2 * self.len().saturating_sub(1)
    }
}

/// Scalar carrying its dense gradient with respect to all latents.
#[derive(Clone, Debug)]
struct Dual {
    v: f64,
    g: Vec<f64>,
}

impl Dual {
    fn constant(v: f64, n: usize) -> Self {
        Dual { v, g: vec![0.0; n] }
    }
    fn variable(v: f64, n: usize, i: usize, dv: f64) -> Self {
        let mut d = Dual::constant(v, n);
        d.g[i] = dv;
        d
    }
    fn add(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a + b).collect(),
        }
    }
    fn mul(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a * o.v + self.v * b).collect(),
        }
    }
    fn scale(&self, c: f64) -> Dual {
        Dual {
            v: self.v * c,
            g: self.g.iter().map(|a| a * c).collect(),
        }
    }
    fn add_const(&self, c: f64) -> Dual {
        Dual {
            v: self.v + c,
            g: self.g.clone(),
        }
    }
    fn chain(&self, v: f64, dv: f64) -> Dual {
        Dual {
            v,
            g: self.g.iter().map(|a| a * dv).collect(),
        }
    }
    fn exp(&self) -> Dual {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn sqrt(&self) -> Dual {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r)
    }
    fn recip(&self) -> Dual {
        self.chain(1.0 / self.v, -1.0 / (self.v * self.v))
    }
}

/// Map from spectrum latents to `[A_0, A_1, ..., A_nb]`: the zero-mode
/// amplitude followed by one amplitude per distinct `|k|`.
///
/// The nonzero-mode amplitudes are normalized so that the field they
/// generate has standard deviation equal to the fluctuations parameter.
pub struct AmplitudeSpectrum {
    params: SpectrumParams,
    bins: KBins,
}

/// Log-amplitude and slope at every bin, plus the scalars, as duals.
struct Realization {
    offset: Dual,
    fluct: Dual,
    tau: Vec<Dual>,
}

impl AmplitudeSpectrum {
    pub fn new(params: SpectrumParams, grid: &Grid) -> Result<Self> {
        params.validate()?;
        let bins = KBins::new(grid);
        if bins.is_empty() {
            return Err(Error::BadShape("grid has no nonzero modes".into()));
        }
        Ok(AmplitudeSpectrum { params, bins })
    }

    pub fn bins(&self) -> &KBins {
        &self.bins
    }

    pub fn params(&self) -> &SpectrumParams {
        &self.params
    }

    fn lognormal(&self, p: LogNormalPrior, xi: &[f64], i: usize) -> Dual {
        let (mu, s) = p.log_params();
        let v = (mu + s * xi[i]).exp();
        Dual::variable(v, xi.len(), i, s * v)
    }

    fn realize(&self, xi: &[f64]) -> Result<Realization> {
        let n = xi.len();
        let p = &self.params;
        let offset = self.lognormal(p.offset_std, xi, 0);
        let fluct = self.lognormal(p.fluctuations, xi, 1);
        let slope = Dual::variable(p.slope.mean + p.slope.std * xi[2], n, 2, p.slope.std);
        let flex = self.lognormal(p.flexibility, xi, 3);
        let asp = self.lognormal(p.asperity, xi, 4);
        for d in [&offset, &fluct, &flex, &asp] {
            if !d.v.is_finite() || d.v <= 0.0 {
                return Err(Error::DomainError("spectrum hyperparameter out of range".into()));
            }
        }
        let asp2 = asp.mul(&asp);
        let mut tau = vec![Dual::constant(0.0, n)];
        let mut y = slope.scale(0.5);
        for j in 1..self.bins.len() {
            let delta = self.bins.log_k[j] - self.bins.log_k[j - 1];
            let eta = Dual::variable(xi[N_SCALARS + 2 * (j - 1)], n, N_SCALARS + 2 * (j - 1), 1.0);
            let zeta = Dual::variable(xi[N_SCALARS + 2 * j - 1], n, N_SCALARS + 2 * j - 1, 1.0);
            // Cholesky factor of [[d^3/3 + e^2 d, d^2/2], [d^2/2, d]].
            let l11 = asp2.scale(delta).add_const(delta.powi(3) / 3.0).sqrt();
            let l21 = l11.recip().scale(0.5 * delta * delta);
            let l22 = l21.mul(&l21).scale(-1.0).add_const(delta).sqrt();
            let prev = tau.last().expect("nonempty");
            let next_tau = prev
                .add(&y.scale(delta))
                .add(&flex.mul(&l11).mul(&eta));
            y = y.add(&flex.mul(&l21.mul(&eta).add(&l22.mul(&zeta))));
            tau.push(next_tau);
        }
        Ok(Realization { offset, fluct, tau })
    }

    fn amplitudes(&self, xi: &[f64]) -> Result<Vec<Dual>> {
        let r = self.realize(xi)?;
        let n = xi.len();
        let tau_max = r.tau.iter().map(|t| t.v).fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<Dual> = r.tau.iter().map(|t| t.add_const(-tau_max).exp()).collect();
        let mut total = Dual::constant(0.0, n);
        for (e, &c) in shifted.iter().zip(&self.bins.counts) {
            total = total.add(&e.mul(e).scale(c as f64));
        }
        let factor = r.fluct.mul(&total.sqrt().recip());
        let mut out = vec![r.offset];
        out.extend(shifted.iter().map(|e| e.mul(&factor)));
        if out.iter().any(|d| !d.v.is_finite()) {
            return Err(Error::NonFiniteValue("amplitude spectrum".into()));
        }
        Ok(out)
    }

    /// Log-amplitudes `tau` per bin before normalization (diagnostic).
    pub fn log_amplitudes(&self, xi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.realize(xi)?.tau.into_iter().map(|t| t.v).collect())
    }
}

impl DifferentiableMap for AmplitudeSpectrum {
    fn dim_in(&self) -> usize {
        self.bins.latent_dim()
    }
    fn dim_out(&self) -> usize {
        self.bins.len() + 1
    }
    fn name(&self) -> String {
        format!("amplitude_spectrum[{} bins]", self.bins.len())
    }
    fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.amplitudes(xi)?.into_iter().map(|d| d.v).collect())
    }
    fn linearize(&self, xi: &[f64]) -> Result<(Vec<f64>, OperatorRef)> {
        let amps = self.amplitudes(xi)?;
        let jac = DenseMatrix::from_fn(amps.len(), xi.len(), |i, j| amps[i].g[j]);
        Ok((amps.iter().map(|d| d.v).collect(), Box::new(DenseOperator(jac))))
    }
}

/// The 2x2 transition covariance `[[d^3/3 + e^2 d, d^2/2], [d^2/2, d]]`
/// scaled by `sigma^2`.
pub fn transition_covariance(delta: f64, sigma: f64, eps: f64) -> [[f64; 2]; 2] {
    let s2 = sigma * sigma;
    [
        [s2 * (delta.powi(3) / 3.0 + eps * eps * delta), s2 * delta * delta / 2.0],
        [s2 * delta * delta / 2.0, s2 * delta],
    ]
}
