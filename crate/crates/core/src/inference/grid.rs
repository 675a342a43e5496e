//! Brute-force densities on regular 1D and 2D grids, used as oracles for
//! KL divergences, evidences and marginals.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DenseTransform, ExpansionPoint, Model};
use crate::linalg::vector::{norm_sq, sub};
use crate::linalg::{materialize, DenseMatrix};

/// Floor applied to normalized densities inside logarithms.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Cell-centred grid: point `i` on an axis sits at `lo + (i + 1/2) h`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let nd = points.len();
        if !(1..=2).contains(&nd) || lo.len() != nd || hi.len() != nd {
            return Err(Error::BadShape("grid must have one or two axes".into()));
        }
        if points.iter().any(|&p| p < 2) || lo.iter().zip(&hi).any(|(l, h)| !(h > l)) {
            return Err(Error::BadShape("degenerate grid axis".into()));
        }
        Ok(GridSpec { lo, hi, points })
    }

    /// Symmetric box `[-half, half]^ndim` with `n` points per axis.
    pub fn square(ndim: usize, half: f64, n: usize) -> Result<Self> {
        GridSpec::new(vec![-half; ndim], vec![half; ndim], vec![n; ndim])
    }

    /// 4096 points over `[-6, 6]` in 1D, 512 per axis in 2D.
    pub fn default_for(ndim: usize) -> Result<Self> {
        match ndim {
            1 => GridSpec::square(1, 6.0, 4096),
            2 => GridSpec::square(2, 6.0, 512),
            _ => Err(Error::BadShape(format!("no grid oracle in {ndim} dimensions"))),
        }
    }

    pub fn ndim(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.points[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).product()
    }

    pub fn axis(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.points[axis])
            .map(|i| self.lo[axis] + (i as f64 + 0.5) * h)
            .collect()
    }

    /// Row-major: the last axis varies fastest.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.ndim()];
        self.fill_point(flat, &mut x);
        x
    }

    /// Writes the coordinates of `flat` into `x` without allocating.
    pub fn fill_point(&self, mut flat: usize, x: &mut [f64]) {
        for a in (0..self.ndim()).rev() {
            let i = flat % self.points[a];
            flat /= self.points[a];
            x[a] = self.lo[a] + (i as f64 + 0.5) * self.spacing(a);
        }
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            idx[a] = flat % self.points[a];
            flat /= self.points[a];
        }
        idx
    }

    /// Flat index of the cell containing `x`, clamped to the grid.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut flat = 0;
        for a in 0..self.ndim() {
            let i = ((x[a] - self.lo[a]) / self.spacing(a)).floor();
            let i = (i.max(0.0) as usize).min(self.points[a] - 1);
            flat = flat * self.points[a] + i;
        }
        flat
    }
}

/// A normalized density on a grid, stored as log values.
#[derive(Clone, Debug)]
pub struct GridDensity {
    spec: GridSpec,
    log_density: Vec<f64>,
    log_norm: f64,
}

impl GridDensity {
    /// Normalizes unnormalized log values; `-inf` entries mean zero mass.
    pub fn from_log_values(spec: GridSpec, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                spec.len()
            )));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::NonNormalizable);
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::NonNormalizable);
        }
        let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
        let log_norm = max + sum.ln() + spec.cell_volume().ln();
        values.iter_mut().for_each(|v| *v -= log_norm);
        Ok(GridDensity {
            spec,
            log_density: values,
            log_norm,
        })
    }

    /// Evaluates `f` in parallel on every grid point. Domain errors map to
    /// zero density; other errors propagate.
    pub fn from_log_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let values = (0..spec.len())
            .into_par_iter()
            .map(|i| {
                let mut buf = [0.0; 2];
                let x = &mut buf[..spec.ndim()];
                spec.fill_point(i, x);
                f(x)
            })
            .map(|v| match v {
                Ok(v) => Ok(v),
                Err(Error::DomainError(_)) | Err(Error::NonFiniteValue(_)) => Ok(f64::NEG_INFINITY),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<f64>>>()?;
        GridDensity::from_log_values(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }

    pub fn density(&self) -> Vec<f64> {
        self.log_density.iter().map(|v| v.exp()).collect()
    }

    /// Log of the integral of the unnormalized input.
    pub fn log_normalization(&self) -> f64 {
        self.log_norm
    }

    /// Probability mass of the cells whose centres satisfy `pred`.
    pub fn mass_where<P: Fn(&[f64]) -> bool>(&self, pred: P) -> f64 {
        let vol = self.spec.cell_volume();
        self.log_density
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(&self.spec.point(*i)))
            .map(|(_, l)| l.exp() * vol)
            .sum()
    }

    /// Marginal density along `axis`, normalized over that axis.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let n = self.spec.points[axis];
        let mut out = vec![0.0; n];
        for (i, l) in self.log_density.iter().enumerate() {
            out[self.spec.unravel(i)[axis]] += l.exp();
        }
        let other: f64 = self.spec.cell_volume() / self.spec.spacing(axis);
        out.iter_mut().for_each(|v| *v *= other);
        out
    }

    /// Mean and covariance under the density.
    pub fn moments(&self) -> (Vec<f64>, DenseMatrix) {
        let nd = self.spec.ndim();
        let vol = self.spec.cell_volume();
        let mut mean = vec![0.0; nd];
        let mut second = DenseMatrix::zeros(nd, nd);
        for (i, l) in self.log_density.iter().enumerate() {
            let w = l.exp() * vol;
            if w == 0.0 {
                continue;
            }
            let x = self.spec.point(i);
            for a in 0..nd {
                mean[a] += w * x[a];
                for b in 0..nd {
                    second[(a, b)] += w * x[a] * x[b];
                }
            }
        }
        for a in 0..nd {
            for b in 0..nd {
                second[(a, b)] -= mean[a] * mean[b];
            }
        }
        (mean, second)
    }

    /// Strict local maxima of a 1D density above `rel` times the peak.
    pub fn count_modes_1d(&self, rel: f64) -> Result<usize> {
        if self.spec.ndim() != 1 {
            return Err(Error::BadShape("mode count needs a 1D grid".into()));
        }
        let d = self.density();
        let peak = d.iter().copied().fold(0.0, f64::max);
        let n = d.len();
        let mut modes = 0;
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { d[i - 1] };
            let right = if i + 1 == n { 0.0 } else { d[i + 1] };
            if d[i] > left && d[i] >= right && d[i] > rel * peak {
                modes += 1;
            }
        }
        Ok(modes)
    }
}

/// `(KL(P;Q), KL(Q;P))` in nats by summation over the shared grid.
pub fn grid_kl(p: &GridDensity, q: &GridDensity) -> Result<(f64, f64)> {
    if p.spec != q.spec {
        return Err(Error::GridMismatch("densities live on different grids".into()));
    }
    let vol = p.spec.cell_volume();
    let floor = DENSITY_FLOOR.ln();
    let one_way = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .filter(|(la, _)| la.is_finite())
            .map(|(la, lb)| la.exp() * (la - lb.max(floor)))
            .sum::<f64>()
            * vol
    };
    let pq = one_way(&p.log_density, &q.log_density).max(0.0);
    let qp = one_way(&q.log_density, &p.log_density).max(0.0);
    Ok((pq, qp))
}

fn check_grid_model(model: &Model, spec: &GridSpec) -> Result<()> {
    if model.prior_dim() != spec.ndim() {
        return Err(Error::GridMismatch(format!(
            "{}-dimensional model on a {}-dimensional grid",
            model.prior_dim(),
            spec.ndim()
        )));
    }
    Ok(())
}

/// The exact posterior on the grid.
pub fn posterior_density(model: &Model, spec: &GridSpec) -> Result<GridDensity> {
    check_grid_model(model, spec)?;
    GridDensity::from_log_fn(spec.clone(), |xi| Ok(-model.hamiltonian(xi)?))
}

/// Log-evidence `log int P(d|xi) N(xi; 0, 1) dxi` by quadrature, with the
/// likelihood's full normalization.
pub fn grid_log_evidence(model: &Model, spec: &GridSpec) -> Result<f64> {
    check_grid_model(model, spec)?;
    let dens = GridDensity::from_log_fn(spec.clone(), |xi| Ok(-model.hamiltonian_full(xi)?))?;
    let m = spec.ndim() as f64;
    Ok(dens.log_normalization() - 0.5 * m * (2.0 * std::f64::consts::PI).ln())
}

/// Density of the transform-based approximation with expansion point
/// `xi_bar` shifted to `shift`:
/// `Q(xi) = N(g(xi - shift + xi_bar); 0, 1) |det dg|`.
///
/// `g` is only invertible on the connected region around the shift where
/// its Jacobian determinant stays positive, so `Q` is restricted to it.
pub fn transform_density(
    model: &Model,
    xi_bar: &[f64],
    shift: &[f64],
    spec: &GridSpec,
) -> Result<GridDensity> {
    check_grid_model(model, spec)?;
    let ep = ExpansionPoint::new(model, xi_bar)?;
    let tr = DenseTransform::new(&ep)?;
    let offset = sub(xi_bar, shift);
    let evals: Vec<(f64, f64)> = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let xi: Vec<f64> = spec.point(i).iter().zip(&offset).map(|(x, o)| x + o).collect();
            match tr.value_and_det(model, &xi, &ep) {
                Ok((g, det)) => Ok((-0.5 * norm_sq(&g), det)),
                Err(Error::DomainError(_)) | Err(Error::NonFiniteValue(_)) => {
                    Ok((f64::NEG_INFINITY, f64::NAN))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let inside = positive_component(spec, &evals, spec.nearest(shift));
    let values = evals
        .iter()
        .zip(&inside)
        .map(|(&(lg, det), &ok)| if ok { lg + det.ln() } else { f64::NEG_INFINITY })
        .collect();
    GridDensity::from_log_values(spec.clone(), values)
}

/// Cells connected to `seed` through cells with a positive determinant.
fn positive_component(spec: &GridSpec, evals: &[(f64, f64)], seed: usize) -> Vec<bool> {
    let ok = |i: usize| evals[i].1 > 0.0 && evals[i].0.is_finite();
    let mut inside = vec![false; spec.len()];
    if !ok(seed) {
        return inside;
    }
    let mut stack = vec![seed];
    inside[seed] = true;
    while let Some(i) = stack.pop() {
        let idx = spec.unravel(i);
        for a in 0..spec.ndim() {
            for step in [-1i64, 1] {
                let j = idx[a] as i64 + step;
                if j < 0 || j >= spec.points[a] as i64 {
                    continue;
                }
                let mut n = idx.clone();
                n[a] = j as usize;
                let flat = n.iter().zip(&spec.points).fold(0, |f, (k, p)| f * p + k);
                if !inside[flat] && ok(flat) {
                    inside[flat] = true;
                    stack.push(flat);
                }
            }
        }
    }
    inside
}

/// Gaussian `N(mean, cov)` on the grid.
pub fn gaussian_density(mean: &[f64], cov: &DenseMatrix, spec: &GridSpec) -> Result<GridDensity> {
    let prec = crate::linalg::dense::inverse_spd(cov)?;
    gaussian_from_precision(mean, &prec, spec)
}

fn gaussian_from_precision(mean: &[f64], prec: &DenseMatrix, spec: &GridSpec) -> Result<GridDensity> {
    if mean.len() != spec.ndim() {
        return Err(Error::GridMismatch("Gaussian dimension differs from grid".into()));
    }
    let nd = mean.len();
    GridDensity::from_log_fn(spec.clone(), |xi| {
        let mut q = 0.0;
        for a in 0..nd {
            for b in 0..nd {
                q += (xi[a] - mean[a]) * prec[(a, b)] * (xi[b] - mean[b]);
            }
        }
        Ok(-0.5 * q)
    })
}

/// MGVI approximation `N(shift, M(xi_bar)^{-1})`.
pub fn mgvi_density(model: &Model, xi_bar: &[f64], shift: &[f64], spec: &GridSpec) -> Result<GridDensity> {
    check_grid_model(model, spec)?;
    let ep = ExpansionPoint::new(model, xi_bar)?;
    let m = materialize(&ep.metric(), xi_bar.len())?;
    gaussian_from_precision(shift, &m, spec)
}

/// The normal distribution in `xi` closest to `p` in `KL(P;Q)`, which is
/// the moment-matched one.
pub fn moment_matched_normal(p: &GridDensity) -> Result<GridDensity> {
    let (mean, cov) = p.moments();
    gaussian_density(&mean, &cov, p.spec())
}

/// The normal distribution in `xi` minimizing the variational divergence
/// `KL(Q;P)`, found by Nelder-Mead over the mean and a log-Cholesky factor
/// of the covariance, started from the moment-matched normal.
pub fn optimal_normal(p: &GridDensity) -> Result<GridDensity> {
    let nd = p.spec().ndim();
    let (mean, cov) = p.moments();
    let l = crate::linalg::dense::cholesky_lower(&cov)?;
    let mut x0 = mean.clone();
    for a in 0..nd {
        for b in 0..=a {
            x0.push(if a == b { l[(a, a)].ln() } else { l[(a, b)] });
        }
    }
    let build = |x: &[f64]| -> Result<GridDensity> {
        let mut l = DenseMatrix::zeros(nd, nd);
        let mut k = nd;
        for a in 0..nd {
            for b in 0..=a {
                l[(a, b)] = if a == b { x[k].exp() } else { x[k] };
                k += 1;
            }
        }
        gaussian_density(&x[..nd], &(&l * l.transpose()), p.spec())
    };
    let cost = |x: &[f64]| match build(x) {
        Ok(q) => grid_kl(p, &q).map_or(f64::INFINITY, |(_, qp)| qp),
        Err(_) => f64::INFINITY,
    };
    let best = nelder_mead(cost, &x0, 0.2, 400, 1e-10);
    build(&best)
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, max_iter: usize, tol: f64) -> Vec<f64> {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=n)
        .map(|i| {
            let mut x = x0.to_vec();
            if i > 0 {
                x[i - 1] += step;
            }
            let v = f(&x);
            (x, v)
        })
        .collect();
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
    };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= tol * (simplex[0].1.abs() + tol) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            crate::linalg::vector::add_assign(&mut centroid, x);
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);
        let worst = simplex[n].0.clone();
        let refl = lerp(&centroid, &worst, -1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = lerp(&centroid, &worst, -2.0);
            let fe = f(&exp);
            simplex[n] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (refl, fr);
        } else {
            let con = lerp(&centroid, &worst, 0.5);
            let fc = f(&con);
            if fc < simplex[n].1 {
                simplex[n] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &entry.0, 0.5);
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0).0
}
