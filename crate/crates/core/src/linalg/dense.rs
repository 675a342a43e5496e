//! Small dense helpers: materialization of implicit operators, Cholesky
//! log-determinants and symmetric matrix functions.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::operator::ImplicitOperator;
use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

pub const DEFAULT_DENSE_LIMIT: usize = 3000;

/// Largest dimension for which dense matrices are built. Read from
/// `GEOVI_DENSE_LIMIT` when set.
pub fn dense_limit() -> usize {
    std::env::var("GEOVI_DENSE_LIMIT")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_LIMIT)
}

pub fn check_dense_dim(dim: usize) -> Result<()> {
    let limit = dense_limit();
    if dim > limit {
        Err(Error::DimensionTooLarge { dim, limit })
    } else {
        Ok(())
    }
}

/// Column `j` of the result is `op` applied to the `j`-th basis vector.
pub fn materialize(op: &dyn ImplicitOperator, dim: usize) -> Result<DenseMatrix> {
    if op.dim_in() != dim {
        return Err(Error::mismatch("materialize", op.dim_in(), dim));
    }
    check_dense_dim(dim.max(op.dim_out()))?;
    let rows = op.dim_out();
    let columns: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            op.apply(&e)
        })
        .collect();
    let mut m = DenseMatrix::zeros(rows, dim);
    for (j, col) in columns.iter().enumerate() {
        if col.len() != rows {
            return Err(Error::mismatch("materialize column", rows, col.len()));
        }
        m.set_column(j, &nalgebra::DVector::from_column_slice(col));
    }
    Ok(m)
}

pub fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    (a + a.transpose()) * 0.5
}

/// Lower Cholesky factor of the symmetrized input.
pub fn cholesky_lower(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::BadShape(format!(
            "cholesky of {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let a = symmetrize(a);
    let n = a.nrows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// `log|A|` for symmetric positive-definite `A`.
pub fn cholesky_logdet(a: &DenseMatrix) -> Result<f64> {
    let l = cholesky_lower(a)?;
    Ok(2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>())
}

fn spectral_map(a: &DenseMatrix, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    let eig = SymmetricEigen::new(symmetrize(a));
    if let Some((i, &v)) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0))
    {
        return Err(Error::NotPositiveDefinite { index: i, pivot: v });
    }
    let d = eig.eigenvalues.map(f);
    let q = &eig.eigenvectors;
    Ok(q * DenseMatrix::from_diagonal(&d) * q.transpose())
}

/// Principal inverse square root of an SPD matrix.
pub fn inv_sqrt_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    spectral_map(a, |v| 1.0 / v.sqrt())
}

/// Principal square root of an SPD matrix.
pub fn sqrt_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    spectral_map(a, f64::sqrt)
}

/// Inverse of an SPD matrix through its Cholesky factor.
pub fn inverse_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    let l = cholesky_lower(a)?;
    let n = l.nrows();
    let linv = l
        .solve_lower_triangular(&DenseMatrix::identity(n, n))
        .ok_or(Error::NotPositiveDefinite {
            index: 0,
            pivot: 0.0,
        })?;
    Ok(linv.transpose() * linv)
}

pub fn mat_vec(a: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    (a * nalgebra::DVector::from_column_slice(v))
        .as_slice()
        .to_vec()
}
