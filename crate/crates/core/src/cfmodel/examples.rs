//! The example models: five low-dimensional demonstrations with grid
//! oracles, a conjugate linear model, and two imaging applications.

use std::sync::Arc;

use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use super::field::CorrelatedField;
use super::sources::{GaussianPsf, InverseGammaQuantile};
use super::spectrum::{LogNormalPrior, NormalPrior, SpectrumParams};
use crate::diffmap::{self, MapRef};
use crate::error::{Error, Result};
use crate::geometry::{Model, SamplerConfig};
use crate::inference::{GridSpec, VariationalConfig};
use crate::likelihoods::Likelihood;
use crate::linalg::{CgConfig, DenseMatrix, DenseOperator, Grid, Rng};

/// Names accepted by [`make_example`].
pub const EXAMPLE_NAMES: [&str; 8] = [
    "lognormal1d",
    "meanvar2d",
    "product2d",
    "sigmoid1d",
    "bimodal1d",
    "linear",
    "lognormal-process",
    "poisson-separation",
];

/// A named latent-space function worth reporting, e.g. the noise level.
/// Solver settings an example suggests for the variational drivers.
#[derive(Clone, Debug, PartialEq)]
pub struct Tuning {
    /// Standard deviation of the initial shift.
    pub init_scale: f64,
    /// Linearized warm-up iterations before geoVI inverts `g~`.
    pub warmup: usize,
    pub sampler_tol: f64,
    pub sampler_max_iter: usize,
    pub accept_tol: f64,
    /// Inner solver of each Gauss-Newton step of the inversion.
    pub inner_cg: CgConfig,
    pub max_outer: usize,
}

impl Default for Tuning {
    fn default() -> Self {
        let s = SamplerConfig::default();
        Tuning {
            init_scale: 1.0,
            warmup: 0,
            sampler_tol: s.tol,
            sampler_max_iter: s.max_iter,
            accept_tol: s.accept_tol,
            inner_cg: s.inner_cg,
            max_outer: VariationalConfig::default().max_outer,
        }
    }
}

impl Tuning {
    /// Settings for the correlated-field examples. Far from the posterior
    /// the amplitude-excitation products make `g~` non-invertible along
    /// some directions, so the first iterations are linearized and
    /// approximate inversions are accepted.
    pub fn field() -> Self {
        Tuning {
            init_scale: 0.1,
            warmup: 3,
            sampler_tol: 1e-3,
            sampler_max_iter: 25,
            accept_tol: 0.05,
            ..Default::default()
        }
    }

    /// Settings for the Poisson source-separation example. Inversions there
    /// converge slowly (the point-source quantile map is steep), so each
    /// Gauss-Newton step is solved loosely and more steps are allowed.
    pub fn poisson() -> Self {
        Tuning {
            init_scale: 0.1,
            warmup: 4,
            sampler_tol: 1e-3,
            sampler_max_iter: 40,
            accept_tol: 0.05,
            inner_cg: CgConfig::with_tol(1e-3, 100),
            max_outer: 10,
        }
    }

    pub fn variational_config(&self) -> VariationalConfig {
        let mut cfg = VariationalConfig {
            init_scale: self.init_scale,
            warmup: self.warmup,
            max_outer: self.max_outer,
            ..Default::default()
        };
        cfg.sampler.tol = self.sampler_tol;
        cfg.sampler.max_iter = self.sampler_max_iter;
        cfg.sampler.accept_tol = self.accept_tol;
        cfg.sampler.inner_cg = self.inner_cg;
        cfg
    }
}

#[derive(Clone)]
pub struct Derived {
    pub name: String,
    pub map: MapRef,
}

/// Everything needed to run and check one experiment.
#[derive(Clone)]
pub struct ExampleBundle {
    pub name: String,
    pub seed: u64,
    /// Grid length per axis for the field examples, latent dimension for
    /// `linear`, unused otherwise.
    pub size: Option<usize>,
    pub model: Model,
    /// Latents the data were generated from, where synthesized.
    pub truth: Option<Vec<f64>>,
    pub data: Vec<f64>,
    /// Grid for brute-force oracles (1D and 2D examples only).
    pub oracle_grid: Option<GridSpec>,
    pub tuning: Tuning,
    pub derived: Vec<Derived>,
    /// `|k|` per power-spectrum bin, where a spectrum is reported.
    pub spectrum_k: Option<Vec<f64>>,
}

impl ExampleBundle {
    pub fn derived(&self, name: &str) -> Option<&MapRef> {
        self.derived.iter().find(|d| d.name == name).map(|d| &d.map)
    }

    /// Evaluates a derived quantity on every sample.
    pub fn derived_samples(&self, name: &str, samples: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let map = self
            .derived(name)
            .ok_or_else(|| Error::Config(format!("example {} has no quantity {name}", self.name)))?;
        samples.iter().map(|s| map.apply(s)).collect()
    }

    pub fn summary(&self) -> ExampleSummary {
        ExampleSummary {
            name: self.name.clone(),
            latent_dim: self.model.prior_dim(),
            data_dim: self.data.len(),
            has_truth: self.truth.is_some(),
            oracle: self.oracle_grid.is_some(),
            derived: self.derived.iter().map(|d| d.name.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleSummary {
    pub name: String,
    pub latent_dim: usize,
    pub data_dim: usize,
    pub has_truth: bool,
    pub oracle: bool,
    pub derived: Vec<String>,
}

/// Builds an example. `size` overrides the default grid length (or the
/// latent dimension of `linear`); `seed` drives data synthesis.
pub fn make_example(name: &str, size: Option<usize>, seed: u64) -> Result<ExampleBundle> {
    match name {
        "lognormal1d" => lognormal1d(),
        "meanvar2d" => meanvar2d(),
        "product2d" => product2d(),
        "sigmoid1d" => sigmoid1d(),
        "bimodal1d" => bimodal1d(),
        "linear" => linear_gaussian(size.unwrap_or(8), size.unwrap_or(8) + 4, seed),
        "lognormal-process" => lognormal_process(&LognormalProcessConfig {
            pixels: size.unwrap_or(128),
            ..Default::default()
        }, seed),
        "poisson-separation" => poisson_separation(&PoissonSeparationConfig {
            side: size.unwrap_or(32),
            ..Default::default()
        }, seed),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

fn low_dim(name: &str, model: Model, data: Vec<f64>) -> Result<ExampleBundle> {
    let ndim = model.prior_dim();
    Ok(ExampleBundle {
        name: name.into(),
        seed: 0,
        size: None,
        model,
        truth: None,
        data,
        oracle_grid: Some(GridSpec::default_for(ndim)?),
        tuning: Tuning::default(),
        derived: vec![Derived {
            name: "signal".into(),
            map: diffmap::identity(ndim),
        }],
        spectrum_k: None,
    })
}

/// `N(d; exp(3 xi), 0.3^2)` with `d = 0.5`.
pub fn lognormal1d() -> Result<ExampleBundle> {
    let f = diffmap::compose(diffmap::exp(1), diffmap::affine_scalar(1, 3.0, 0.0))?;
    let data = vec![0.5];
    let model = Model::new(f, Likelihood::normal_iid(data.clone(), 0.3)?)?;
    low_dim("lognormal1d", model, data)
}

/// Unknown mean `m = xi_1` and variance `v = exp(3 (xi_2 + 2 xi_1))` of a
/// single datum `d = 0`.
pub fn meanvar2d() -> Result<ExampleBundle> {
    let mixing = DenseMatrix::from_row_slice(1, 2, &[6.0, 3.0]);
    let var = diffmap::compose(
        diffmap::exp(1),
        diffmap::linear(Arc::new(DenseOperator(mixing)), "3(xi2 + 2 xi1)"),
    )?;
    let f = diffmap::stack(vec![diffmap::select(2, vec![0])?, var])?;
    let data = vec![0.0];
    let model = Model::new(f, Likelihood::variable_noise_normal(data.clone())?)?;
    low_dim("meanvar2d", model, data)
}

/// `N(d; xi_1 exp(xi_2), 0.1^2)` with `d = -0.3`.
pub fn product2d() -> Result<ExampleBundle> {
    let f = diffmap::product(
        diffmap::select(2, vec![0])?,
        diffmap::compose(diffmap::exp(1), diffmap::select(2, vec![1])?)?,
    )?;
    let data = vec![-0.3];
    let model = Model::new(f, Likelihood::normal_iid(data.clone(), 0.1)?)?;
    low_dim("product2d", model, data)
}

/// `N(d; sigmoid(3 xi), 0.2^2)` with `d = 0.2`.
pub fn sigmoid1d() -> Result<ExampleBundle> {
    let f = diffmap::compose(diffmap::sigmoid(1), diffmap::affine_scalar(1, 3.0, 0.0))?;
    let data = vec![0.2];
    let model = Model::new(f, Likelihood::normal_iid(data.clone(), 0.2)?)?;
    low_dim("sigmoid1d", model, data)
}

/// `N(d; xi^4 + xi, 1)` with `d = 3`, a bimodal posterior.
pub fn bimodal1d() -> Result<ExampleBundle> {
    let f = diffmap::add(vec![diffmap::power(1, 4.0), diffmap::identity(1)])?;
    let data = vec![3.0];
    let model = Model::new(f, Likelihood::normal_iid(data.clone(), 1.0)?)?;
    low_dim("bimodal1d", model, data)
}

/// Random linear model `d = A xi + n` with unit noise; `A` has entries
/// `N(0, 0.7^2)` and the data are drawn from the model.
pub fn linear_gaussian(dim: usize, ndata: usize, seed: u64) -> Result<ExampleBundle> {
    if dim == 0 || ndata == 0 {
        return Err(Error::BadShape("linear model needs positive dimensions".into()));
    }
    let mut rng = Rng::derive(seed, &[0x4c49_4e]);
    let a = DenseMatrix::from_fn(ndata, dim, |_, _| 0.7 * rng.normal());
    let truth = rng.standard_normal(dim);
    let mut data = crate::linalg::dense::mat_vec(&a, &truth);
    data.iter_mut().for_each(|d| *d += rng.normal());
    let f = diffmap::linear(Arc::new(DenseOperator(a)), "A");
    let model = Model::new(f, Likelihood::normal_iid(data.clone(), 1.0)?)?;
    Ok(ExampleBundle {
        name: "linear".into(),
        seed,
        size: Some(dim),
        model,
        truth: Some(truth),
        data,
        oracle_grid: (dim <= 2).then(|| GridSpec::default_for(dim)).transpose()?,
        tuning: Tuning::default(),
        derived: vec![Derived {
            name: "signal".into(),
            map: diffmap::identity(dim),
        }],
        spectrum_k: None,
    })
}

/// The exact posterior mean and covariance of a linear-Gaussian bundle.
pub fn linear_posterior(bundle: &ExampleBundle) -> Result<(Vec<f64>, DenseMatrix)> {
    let dim = bundle.model.prior_dim();
    let a = crate::linalg::materialize(
        bundle.model.forward().linearize(&vec![0.0; dim])?.1.as_ref(),
        dim,
    )?;
    let prec = a.transpose() * &a + DenseMatrix::identity(dim, dim);
    let cov = crate::linalg::dense::inverse_spd(&prec)?;
    let atd = crate::linalg::dense::mat_vec(&a.transpose(), &bundle.data);
    Ok((crate::linalg::dense::mat_vec(&cov, &atd), cov))
}

/// Settings of the masked log-normal process with unknown noise level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LognormalProcessConfig {
    pub pixels: usize,
    pub spectrum: SpectrumParams,
    pub noise_prior: LogNormalPrior,
    pub true_noise: f64,
    /// Fraction of pixels, centred, left unobserved.
    pub masked_fraction: f64,
}

impl Default for LognormalProcessConfig {
    fn default() -> Self {
        LognormalProcessConfig {
            pixels: 128,
            spectrum: SpectrumParams::default(),
            noise_prior: LogNormalPrior { mean: 0.3, std: 0.2 },
            true_noise: 0.2,
            masked_fraction: 0.2,
        }
    }
}

/// `d = R exp(s) + n` with `n ~ N(0, sigma_n^2)`, a correlated field `s`
/// and a log-normal prior on `sigma_n`. The latent vector is the field
/// latents followed by the noise latent.
pub fn lognormal_process(cfg: &LognormalProcessConfig, seed: u64) -> Result<ExampleBundle> {
    let n = cfg.pixels;
    let grid = Grid::new(&[n])?;
    let cf = CorrelatedField::new(cfg.spectrum, &grid)?;
    let ns = cf.spectrum_dim();
    let spectrum = cf.spectrum().clone();
    let k: Vec<f64> = spectrum.bins().log_k.iter().map(|l| l.exp()).collect();
    let nb = k.len();
    let dim = ns + n + 1;
    LogNormalPrior::new(cfg.noise_prior.mean, cfg.noise_prior.std)?;

    let masked = (cfg.masked_fraction * n as f64).round() as usize;
    let start = (n - masked) / 2;
    let observed: Vec<usize> = (0..n).filter(|&i| i < start || i >= start + masked).collect();
    let n_obs = observed.len();

    let field = diffmap::compose(Arc::new(cf), diffmap::slice(dim, 0, ns + n)?)?;
    let signal = diffmap::compose(diffmap::exp(n), field.clone())?;
    let (mu, s) = cfg.noise_prior.log_params();
    let noise_latent = diffmap::select(dim, vec![dim - 1])?;
    let sigma = diffmap::chain(&[noise_latent.clone(), diffmap::affine_scalar(1, s, mu), diffmap::exp(1)])?;
    let variance = diffmap::chain(&[
        noise_latent,
        diffmap::affine_scalar(1, 2.0 * s, 2.0 * mu),
        diffmap::exp(1),
        diffmap::broadcast(n_obs),
    ])?;
    let means = diffmap::compose(diffmap::select(n, observed)?, signal.clone())?;
    let forward = diffmap::stack(vec![means.clone(), variance])?;

    let mut rng = Rng::derive(seed, &[0x4c4e_50]);
    let mut truth = rng.standard_normal(dim);
    truth[dim - 1] = cfg.noise_prior.latent(cfg.true_noise);
    let clean = means.apply(&truth)?;
    let data: Vec<f64> = clean.iter().map(|m| m + cfg.true_noise * rng.normal()).collect();
    let model = Model::new(forward, Likelihood::variable_noise_normal(data.clone())?)?;

    let power = diffmap::chain(&[
        diffmap::slice(dim, 0, ns)?,
        spectrum as MapRef,
        diffmap::slice(nb + 1, 1, nb)?,
        diffmap::power(nb, 2.0),
    ])?;
    Ok(ExampleBundle {
        name: "lognormal-process".into(),
        seed,
        size: Some(n),
        model,
        truth: Some(truth),
        data,
        oracle_grid: None,
        tuning: Tuning::field(),
        derived: vec![
            Derived { name: "signal".into(), map: signal },
            Derived { name: "sigma_n".into(), map: sigma },
            Derived { name: "power_spectrum".into(), map: power },
            Derived { name: "log_signal".into(), map: field },
        ],
        spectrum_k: Some(k),
    })
}

/// Settings of the diffuse/point-source separation problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonSeparationConfig {
    pub side: usize,
    pub spectrum: SpectrumParams,
    /// Inverse-gamma shape and scale of the point sources.
    pub alpha: f64,
    pub q: f64,
    /// Mean of `log` diffuse emission.
    pub log_level: f64,
    /// Counts per unit flux.
    pub exposure: f64,
    pub psf_fwhm: f64,
}

/// The diffuse prior is smoother than the field default: with a PSF a few
/// pixels wide, a rough diffuse field mimics point sources and the
/// separation is not identifiable on small images.
impl Default for PoissonSeparationConfig {
    fn default() -> Self {
        PoissonSeparationConfig {
            side: 32,
            spectrum: SpectrumParams {
                fluctuations: LogNormalPrior { mean: 1.0, std: 0.3 },
                slope: NormalPrior { mean: -4.0, std: 0.5 },
                flexibility: LogNormalPrior { mean: 0.1, std: 0.05 },
                ..Default::default()
            },
            alpha: 2.0,
            q: 3.0,
            log_level: 5f64.ln(),
            exposure: 20.0,
            psf_fwhm: 3.0,
        }
    }
}

/// Poisson counts with rate `exposure * R(p + exp(s))`: PSF `R`,
/// inverse-gamma point sources `p` in every pixel and a log-normal diffuse
/// component. Latents are the field latents followed by one point-source
/// latent per pixel.
pub fn poisson_separation(cfg: &PoissonSeparationConfig, seed: u64) -> Result<ExampleBundle> {
    let side = cfg.side;
    let grid = Grid::new(&[side, side])?;
    let n = grid.size();
    let cf = CorrelatedField::new(cfg.spectrum, &grid)?;
    let ns = cf.spectrum_dim();
    let spectrum = cf.spectrum().clone();
    let k: Vec<f64> = spectrum.bins().log_k.iter().map(|l| l.exp()).collect();
    let nb = k.len();
    let dim = ns + 2 * n;

    let log_diffuse = diffmap::chain(&[
        diffmap::slice(dim, 0, ns + n)?,
        Arc::new(cf) as MapRef,
        diffmap::affine_scalar(n, 1.0, cfg.log_level),
    ])?;
    let diffuse = diffmap::compose(diffmap::exp(n), log_diffuse)?;
    let quantile = InverseGammaQuantile::new(cfg.alpha, cfg.q)?;
    let points = diffmap::compose(
        diffmap::pointwise(n, Arc::new(quantile)),
        diffmap::slice(dim, ns + n, n)?,
    )?;
    let psf = GaussianPsf::new(&grid, cfg.psf_fwhm)?;
    let rate = diffmap::chain(&[
        diffmap::add(vec![diffuse.clone(), points.clone()])?,
        diffmap::linear(Arc::new(psf), "psf"),
        diffmap::affine_scalar(n, cfg.exposure, 0.0),
    ])?;

    let mut rng = Rng::derive(seed, &[0x5053_50]);
    let truth = rng.standard_normal(dim);
    let lambda = rate.apply(&truth)?;
    let data = lambda
        .iter()
        .map(|&l| {
            let l = l.max(1e-12);
            Poisson::new(l)
                .map(|p| p.sample(&mut rng))
                .map_err(|e| Error::DomainError(format!("Poisson rate {l}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let model = Model::new(rate.clone(), Likelihood::poisson(data.clone())?)?;

    let power = diffmap::chain(&[
        diffmap::slice(dim, 0, ns)?,
        spectrum as MapRef,
        diffmap::slice(nb + 1, 1, nb)?,
        diffmap::power(nb, 2.0),
    ])?;
    Ok(ExampleBundle {
        name: "poisson-separation".into(),
        seed,
        size: Some(side),
        model,
        truth: Some(truth),
        data,
        oracle_grid: None,
        tuning: Tuning::poisson(),
        derived: vec![
            Derived { name: "diffuse".into(), map: diffuse },
            Derived { name: "point_sources".into(), map: points },
            Derived { name: "rate".into(), map: rate },
            Derived { name: "power_spectrum".into(), map: power },
        ],
        spectrum_k: Some(k),
    })
}
