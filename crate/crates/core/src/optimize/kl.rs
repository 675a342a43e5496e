//! The sampled KL objective `mean_i H(m + r_i)` and its averaged-metric
//! curvature.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Model;
use crate::linalg::vector::{add, add_assign, check_len, lex_cmp};
use crate::linalg::{ImplicitOperator, OperatorRef};

use super::newton::{Evaluation, Objective};

/// KL up to constants, estimated with fixed residual samples.
///
/// Samples are sorted on construction so that results do not depend on
/// the order in which they were drawn.
pub struct SampledKl<'a> {
    model: &'a Model,
    residuals: Vec<Vec<f64>>,
}

impl<'a> SampledKl<'a> {
    pub fn new(model: &'a Model, mut residuals: Vec<Vec<f64>>) -> Result<Self> {
        if residuals.is_empty() {
            return Err(Error::BadShape("sampled KL needs at least one sample".into()));
        }
        for r in &residuals {
            check_len("residual sample", model.prior_dim(), r)?;
        }
        residuals.sort_by(|a, b| lex_cmp(a, b));
        Ok(SampledKl { model, residuals })
    }

    pub fn residuals(&self) -> &[Vec<f64>] {
        &self.residuals
    }

    /// Runs `f` on every sample position `m + r_i` in parallel, dropping
    /// samples outside the model's domain. When more than half drop, `m`
    /// itself counts as outside the domain, which lets a line search back
    /// off.
    fn per_sample<T: Send>(
        &self,
        m: &[f64],
        f: impl Fn(&[f64]) -> Result<T> + Sync,
    ) -> Result<Vec<T>> {
        let results: Vec<Result<T>> = self
            .residuals
            .par_iter()
            .map(|r| f(&add(m, r)))
            .collect();
        let n = results.len();
        let mut kept = Vec::with_capacity(n);
        let mut dropped = 0;
        for r in results {
            match r {
                Ok(v) => kept.push(v),
                Err(Error::DomainError(msg)) => {
                    dropped += 1;
                    log::warn!("dropping KL sample outside the model domain: {msg}");
                }
                Err(e) => return Err(e),
            }
        }
        if 2 * dropped > n {
            return Err(Error::DomainError(format!(
                "{dropped} of {n} KL samples left the model domain"
            )));
        }
        Ok(kept)
    }

    pub fn value_grad(&self, m: &[f64]) -> Result<(f64, Vec<f64>)> {
        let parts = self.per_sample(m, |xi| self.model.hamiltonian_grad(xi))?;
        let k = parts.len() as f64;
        let mut value = 0.0;
        let mut grad = vec![0.0; m.len()];
        for (v, g) in &parts {
            value += v;
            add_assign(&mut grad, g);
        }
        grad.iter_mut().for_each(|g| *g /= k);
        Ok((value / k, grad))
    }

    pub fn averaged_metric(&self, m: &[f64]) -> Result<AveragedMetric> {
        let jacs = self.per_sample(m, |xi| {
            let (_, j) = self.model.xi_transform().linearize(xi)?;
            Ok(j)
        })?;
        Ok(AveragedMetric { jacs })
    }
}

impl Objective for SampledKl<'_> {
    fn dim(&self) -> usize {
        self.model.prior_dim()
    }
    fn value(&self, m: &[f64]) -> Result<f64> {
        let parts = self.per_sample(m, |xi| self.model.hamiltonian(xi))?;
        Ok(parts.iter().sum::<f64>() / parts.len() as f64)
    }
    fn evaluate(&self, m: &[f64]) -> Result<Evaluation> {
        let (value, grad) = self.value_grad(m)?;
        Ok(Evaluation {
            value,
            grad,
            curvature: Box::new(self.averaged_metric(m)?),
        })
    }
}

/// `v -> mean_i J_i^T J_i v + v`.
pub struct AveragedMetric {
    jacs: Vec<OperatorRef>,
}

impl ImplicitOperator for AveragedMetric {
    fn dim_in(&self) -> usize {
        self.jacs[0].dim_in()
    }
    fn dim_out(&self) -> usize {
        self.dim_in()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let terms: Vec<Vec<f64>> = self
            .jacs
            .par_iter()
            .map(|j| j.apply_adjoint(&j.apply(v)))
            .collect();
        let k = terms.len() as f64;
        let mut out = vec![0.0; v.len()];
        for t in &terms {
            add_assign(&mut out, t);
        }
        out.iter_mut().zip(v).for_each(|(o, x)| *o = *o / k + x);
        out
    }
    fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u)
    }
}

/// Sampled KL value and gradient at `m`.
pub fn kl_value_grad(model: &Model, m: &[f64], residuals: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    SampledKl::new(model, residuals.to_vec())?.value_grad(m)
}

/// Averaged metric applied to `v`.
pub fn averaged_metric_mvp(
    model: &Model,
    m: &[f64],
    residuals: &[Vec<f64>],
    v: &[f64],
) -> Result<Vec<f64>> {
    Ok(SampledKl::new(model, residuals.to_vec())?
        .averaged_metric(m)?
        .apply(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffmap::{self, MapRef};
    use crate::likelihoods::Likelihood;
    use crate::linalg::{materialize, Rng};

    fn model_2d() -> Model {
        let f: MapRef = diffmap::product(
            diffmap::select(2, vec![0]).unwrap(),
            diffmap::compose(diffmap::exp(1), diffmap::select(2, vec![1]).unwrap()).unwrap(),
        )
        .unwrap();
        Model::new(f, Likelihood::normal_iid(vec![-0.3], 0.1).unwrap()).unwrap()
    }

    fn prior_model(dim: usize) -> Model {
        Model::new(
            diffmap::constant(dim, vec![0.0]),
            Likelihood::normal_iid(vec![0.0], 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn degenerate_sample_set() {
        let m = model_2d();
        let x = [0.3, -0.2];
        let (v, _) = kl_value_grad(&m, &x, &[vec![0.0, 0.0]]).unwrap();
        assert_eq!(v, m.hamiltonian(&x).unwrap());
        let a = averaged_metric_mvp(&m, &x, &[vec![0.0; 2]], &[1.0, 2.0]).unwrap();
        let b = m.metric_mvp(&x, &[1.0, 2.0]).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-14));
    }

    #[test]
    fn antithetic_prior_gradient() {
        let m = prior_model(3);
        let r = vec![0.4, -1.2, 0.7];
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let shift = [0.1, 0.2, -0.3];
        let (_, g) = kl_value_grad(&m, &shift, &[r, neg]).unwrap();
        for (a, b) in g.iter().zip(&shift) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = model_2d();
        let mut rng = Rng::new(3);
        let samples: Vec<Vec<f64>> = (0..4).map(|_| rng.standard_normal(2)).collect();
        let kl = SampledKl::new(&m, samples).unwrap();
        let x = [0.2, -0.4];
        let (_, g) = kl.value_grad(&x).unwrap();
        for k in 0..2 {
            let h = 1e-6;
            let mut p = x.to_vec();
            let mut q = x.to_vec();
            p[k] += h;
            q[k] -= h;
            let fd = (kl.value(&p).unwrap() - kl.value(&q).unwrap()) / (2.0 * h);
            assert!((fd - g[k]).abs() / g[k].abs() < 1e-6);
        }
    }

    #[test]
    fn permutation_invariance_and_dense_average() {
        let m = model_2d();
        let mut rng = Rng::new(4);
        let samples: Vec<Vec<f64>> = (0..4).map(|_| rng.standard_normal(2)).collect();
        let mut rev = samples.clone();
        rev.reverse();
        let x = [0.1, 0.1];
        assert_eq!(
            kl_value_grad(&m, &x, &samples).unwrap(),
            kl_value_grad(&m, &x, &rev).unwrap()
        );
        let kl = SampledKl::new(&m, samples.clone()).unwrap();
        let avg = materialize(&kl.averaged_metric(&x).unwrap(), 2).unwrap();
        let mut want = crate::linalg::DenseMatrix::zeros(2, 2);
        for r in &samples {
            want += materialize(&m.metric(&add(&x, r)).unwrap(), 2).unwrap();
        }
        want /= 4.0;
        assert!((avg - want).amax() < 1e-12);
    }

    #[test]
    fn averaged_metric_bounded_below() {
        let m = model_2d();
        let mut rng = Rng::new(6);
        let samples: Vec<Vec<f64>> = (0..4).map(|_| rng.standard_normal(2)).collect();
        let op = SampledKl::new(&m, samples).unwrap().averaged_metric(&[0.0, 0.5]).unwrap();
        for _ in 0..10 {
            let v = rng.standard_normal(2);
            let mv = op.apply(&v);
            let q: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
            assert!(q >= v.iter().map(|a| a * a).sum::<f64>() - 1e-12);
        }
    }
}
