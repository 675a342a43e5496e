//! Likelihood energies `H(d|s')` and their metric-root transforms `x(s')`.
//!
//! A transform satisfies `(dx/ds')^T (dx/ds') = M_{d|s'}`, the Fisher
//! metric of the likelihood. For Poisson and Bernoulli data the roots are
//! `2 sqrt(s')` and `2 arcsin(sqrt(s'))`; these are the forms whose
//! Jacobians reproduce the metrics `1/s'` and `1/(s'(1-s'))`.
//!
//! Independent likelihoods are combined with [`Likelihood::stack`]:
//! energies add and transforms concatenate, so metrics add.

mod family;

use crate::diffmap::{self, MapRef};
use crate::error::{Error, Result};
use crate::linalg::vector::check_len;

pub use family::{poisson_floor_hits, Family, POISSON_RATE_FLOOR};

#[derive(Clone, Debug)]
struct Term {
    family: Family,
    data: Vec<f64>,
    /// Positions of this term's `s'` entries in the combined input.
    indices: Vec<usize>,
}

/// A (possibly stacked) likelihood over an input vector `s'`.
#[derive(Clone, Debug)]
pub struct Likelihood {
    dim_in: usize,
    terms: Vec<Term>,
}

impl Likelihood {
    pub fn new(family: Family, data: Vec<f64>) -> Result<Self> {
        family.validate(&data)?;
        let dim_in = family.input_dim(data.len());
        Ok(Likelihood {
            dim_in,
            terms: vec![Term {
                family,
                data,
                indices: (0..dim_in).collect(),
            }],
        })
    }

    pub fn normal(data: Vec<f64>, noise_var: Vec<f64>) -> Result<Self> {
        Self::new(Family::Normal { noise_var }, data)
    }

    /// Normal noise with a common standard deviation.
    pub fn normal_iid(data: Vec<f64>, sigma: f64) -> Result<Self> {
        let n = data.len();
        Self::normal(data, vec![sigma * sigma; n])
    }

    pub fn poisson(counts: Vec<f64>) -> Result<Self> {
        Self::new(Family::Poisson, counts)
    }

    /// Gaussian data with unknown per-point mean and variance; the input is
    /// the means followed by the variances.
    pub fn variable_noise_normal(data: Vec<f64>) -> Result<Self> {
        Self::new(Family::VariableNoiseNormal, data)
    }

    /// Combines independent likelihoods. Each part reads the entries
    /// `indices` of a shared input of length `dim_in`.
    pub fn stack(parts: Vec<(Likelihood, Vec<usize>)>, dim_in: usize) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::BadShape("stack of no likelihoods".into()));
        }
        let mut terms = Vec::new();
        for (lh, idx) in parts {
            if idx.len() != lh.dim_in {
                return Err(Error::mismatch("likelihood index map", lh.dim_in, idx.len()));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim_in) {
                return Err(Error::BadShape(format!("index {bad} outside input of length {dim_in}")));
            }
            for t in lh.terms {
                terms.push(Term {
                    indices: t.indices.iter().map(|&i| idx[i]).collect(),
                    ..t
                });
            }
        }
        Ok(Likelihood { dim_in, terms })
    }

    /// Stacks likelihoods that all read the same input.
    pub fn stack_shared(parts: Vec<Likelihood>) -> Result<Self> {
        let dim = parts
            .first()
            .ok_or_else(|| Error::BadShape("stack of no likelihoods".into()))?
            .dim_in;
        if let Some(p) = parts.iter().find(|p| p.dim_in != dim) {
            return Err(Error::mismatch("shared likelihood input", dim, p.dim_in));
        }
        Self::stack(parts.into_iter().map(|p| (p, (0..dim).collect())).collect(), dim)
    }

    /// Stacks likelihoods on consecutive blocks of the input.
    pub fn stack_partitioned(parts: Vec<Likelihood>) -> Result<Self> {
        let mut offset = 0;
        let mut with_idx = Vec::with_capacity(parts.len());
        for p in parts {
            let idx = (offset..offset + p.dim_in).collect();
            offset += p.dim_in;
            with_idx.push((p, idx));
        }
        Self::stack(with_idx, offset)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    /// Output length of the transform.
    pub fn dim_x(&self) -> usize {
        self.terms.iter().map(|t| t.indices.len()).sum()
    }

    pub fn families(&self) -> Vec<&Family> {
        self.terms.iter().map(|t| &t.family).collect()
    }

    fn gather(t: &Term, s: &[f64]) -> Vec<f64> {
        t.indices.iter().map(|&i| s[i]).collect()
    }

    /// Energy up to `s'`-independent constants, and its gradient.
    pub fn energy_grad(&self, s: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_len("likelihood input", self.dim_in, s)?;
        let mut e = 0.0;
        let mut g = vec![0.0; self.dim_in];
        for t in &self.terms {
            let (te, tg) = t.family.energy_grad(&t.data, &Self::gather(t, s))?;
            e += te;
            for (&i, v) in t.indices.iter().zip(tg) {
                g[i] += v;
            }
        }
        if !e.is_finite() {
            return Err(Error::NonFiniteValue("likelihood energy".into()));
        }
        Ok((e, g))
    }

    pub fn energy(&self, s: &[f64]) -> Result<f64> {
        Ok(self.energy_grad(s)?.0)
    }

    pub fn grad(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.energy_grad(s)?.1)
    }

    /// Constant `c` with `-log P(d|s') = energy(s') + c`.
    pub fn normalization(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.family.normalization(&t.data))
            .sum()
    }

    /// Diagonal Fisher metric in `s'` (all supported families have one).
    pub fn fisher_diag(&self, s: &[f64]) -> Result<Vec<f64>> {
        check_len("likelihood input", self.dim_in, s)?;
        let mut out = vec![0.0; self.dim_in];
        for t in &self.terms {
            let d = t.family.fisher_diag(&t.data, &Self::gather(t, s))?;
            for (&i, v) in t.indices.iter().zip(d) {
                out[i] += v;
            }
        }
        Ok(out)
    }

    /// Metric-root transform `s' -> x`.
    pub fn transform(&self) -> Result<MapRef> {
        let parts = self
            .terms
            .iter()
            .map(|t| {
                let x = t.family.transform(&t.data);
                let identity = t.indices.len() == self.dim_in
                    && t.indices.iter().enumerate().all(|(k, &i)| k == i);
                if identity {
                    Ok(x)
                } else {
                    diffmap::compose(x, diffmap::select(self.dim_in, t.indices.clone())?)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if parts.len() == 1 {
            Ok(parts.into_iter().next().expect("one part"))
        } else {
            diffmap::stack(parts)
        }
    }
}

#[cfg(test)]
mod tests;
