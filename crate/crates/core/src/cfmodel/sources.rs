//! Inverse-gamma point sources and Gaussian point spread functions.

use std::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::diffmap::ScalarFunction;
use crate::error::{Error, Result};
use crate::linalg::fft::{fft, Direction};
use crate::linalg::{Grid, ImplicitOperator};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

fn normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// `p = F^{-1}(Phi(xi))` for the inverse-gamma distribution with shape
/// `alpha` and scale `q`: a standard normal latent pushed to a point
/// source flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseGammaQuantile {
    pub alpha: f64,
    pub q: f64,
}

impl InverseGammaQuantile {
    pub fn new(alpha: f64, q: f64) -> Result<Self> {
        if !(alpha > 0.0 && q > 0.0) {
            return Err(Error::DomainError(format!(
                "inverse-gamma needs positive shape and scale, got ({alpha}, {q})"
            )));
        }
        Ok(InverseGammaQuantile { alpha, q })
    }

    pub fn log_pdf(&self, p: f64) -> f64 {
        self.alpha * self.q.ln() - ln_gamma(self.alpha) - (self.alpha + 1.0) * p.ln() - self.q / p
    }

    /// Solves for `x = q/p`, the gamma variate with `Q(alpha, x) = Phi(xi)`.
    /// Whichever tail is smaller is matched, which keeps both tails
    /// accurate.
    fn gamma_variate(&self, xi: f64) -> Result<f64> {
        let a = self.alpha;
        let upper = xi < 0.0;
        let target = if upper { normal_cdf(xi) } else { normal_cdf(-xi) };
        if !(target > 0.0) {
            return Err(Error::DomainError(format!("latent {xi} beyond quantile range")));
        }
        let ln_t = target.ln();
        // Residual in log space as a function of u = ln x; increasing in u.
        let resid = |u: f64| -> (f64, f64) {
            let x = u.exp();
            let log_dens = (a - 1.0) * u - x - ln_gamma(a);
            if upper {
                let tail = gamma_ur(a, x);
                (ln_t - tail.ln(), (log_dens + u).exp() / tail)
            } else {
                let tail = gamma_lr(a, x);
                (tail.ln() - ln_t, (log_dens + u).exp() / tail)
            }
        };
        let (mut lo, mut hi) = (-745.0, (a + 50.0 * a.sqrt() + 800.0).ln());
        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (r, d) = resid(u);
            if !r.is_finite() {
                // Underflow of the tail: the root lies further inside.
                if upper { hi = u } else { lo = u }
                u = 0.5 * (lo + hi);
                continue;
            }
            if r > 0.0 { hi = u } else { lo = u }
            let newton = u - r / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - u).abs() < 1e-13 * (1.0 + u.abs()) {
                return Ok(next.exp());
            }
            u = next;
        }
        if hi - lo < 1e-10 {
            return Ok(u.exp());
        }
        Err(Error::NotConverged {
            context: "inverse-gamma quantile".into(),
            residual: hi - lo,
        })
    }

    pub fn quantile_of_latent(&self, xi: f64) -> Result<f64> {
        Ok(self.q / self.gamma_variate(xi)?)
    }
}

impl ScalarFunction for InverseGammaQuantile {
    fn name(&self) -> String {
        format!("inverse_gamma_quantile({}, {})", self.alpha, self.q)
    }
    fn eval(&self, xi: f64) -> Result<(f64, f64)> {
        let p = self.quantile_of_latent(xi)?;
        let d = (normal_log_pdf(xi) - self.log_pdf(p)).exp();
        if !p.is_finite() || !d.is_finite() {
            return Err(Error::DomainError(format!("point source flux overflow at {xi}")));
        }
        Ok((p, d))
    }
}

/// Periodic convolution with a normalized isotropic Gaussian kernel,
/// applied by FFT. Self-adjoint.
#[derive(Clone, Debug)]
pub struct GaussianPsf {
    grid: Grid,
    kernel_hat: Vec<f64>,
}

impl GaussianPsf {
    pub fn new(grid: &Grid, fwhm: f64) -> Result<Self> {
        if !(fwhm > 0.0) {
            return Err(Error::DomainError("PSF width must be positive".into()));
        }
        let sigma = fwhm / (2.0 * (2.0 * LN_2).sqrt());
        let mut kernel: Vec<f64> = (0..grid.size())
            .map(|i| {
                let r2: f64 = grid.wavevector(i).iter().map(|&d| (d * d) as f64).sum();
                (-0.5 * r2 / (sigma * sigma)).exp()
            })
            .collect();
        let total: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= total);
        let kc: Vec<Complex64> = kernel.iter().map(|&k| Complex64::new(k, 0.0)).collect();
        let kernel_hat = fft(&kc, grid, Direction::Forward)?.iter().map(|z| z.re).collect();
        Ok(GaussianPsf {
            grid: grid.clone(),
            kernel_hat,
        })
    }
}

impl ImplicitOperator for GaussianPsf {
    fn dim_in(&self) -> usize {
        self.grid.size()
    }
    fn dim_out(&self) -> usize {
        self.grid.size()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let f: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut h = fft(&f, &self.grid, Direction::Forward).expect("grid was validated");
        h.iter_mut().zip(&self.kernel_hat).for_each(|(z, k)| *z *= k);
        fft(&h, &self.grid, Direction::Adjoint)
            .expect("grid was validated")
            .iter()
            .map(|z| z.re)
            .collect()
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u)
    }
}
