//! Helpers on `&[f64]` coordinate vectors.
//!
//! Latent vectors, residuals and data are carried as plain `Vec<f64>`;
//! finiteness is checked where values enter public operations.

use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn add_assign(y: &mut [f64], x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi;
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn check_finite(context: &str, a: &[f64]) -> Result<()> {
    if all_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue(context.to_string()))
    }
}

pub fn check_len(context: &str, expected: usize, a: &[f64]) -> Result<()> {
    if a.len() == expected {
        Ok(())
    } else {
        Err(Error::mismatch(context, expected, a.len()))
    }
}

/// Mean of a list of equally sized vectors, summed in list order.
pub fn mean_of(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len();
    let mut out = vec![0.0; vectors.first().map_or(0, Vec::len)];
    for v in vectors {
        add_assign(&mut out, v);
    }
    if n > 0 {
        let inv = 1.0 / n as f64;
        out.iter_mut().for_each(|x| *x *= inv);
    }
    out
}

/// Lexicographic total order on vectors, used to fix summation orders.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}
