//! Radix-2 FFT on periodic 1D/2D grids.
//!
//! Convention: the forward transform has no prefactor and the adjoint
//! (inverse) direction carries `1/N`, so `adjoint(forward(f)) = f`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Adjoint,
}

/// Periodic grid with power-of-two axes, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(shape: &[usize]) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 {
            return Err(Error::BadShape(format!(
                "grids have 1 or 2 axes, got {}",
                shape.len()
            )));
        }
        if let Some(&n) = shape.iter().find(|&&n| n == 0 || !n.is_power_of_two()) {
            return Err(Error::BadShape(format!("axis length {n} is not a power of two")));
        }
        Ok(Grid {
            shape: shape.to_vec(),
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn size(&self) -> usize {
        self.shape.iter().product()
    }

    /// Signed integer wave vector of a flat index (`n/2` maps to `-n/2`).
    pub fn wavevector(&self, flat: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.ndim()];
        let mut rem = flat;
        for ax in (0..self.ndim()).rev() {
            let n = self.shape[ax];
            let i = rem % n;
            rem /= n;
            out[ax] = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
        }
        out
    }

    /// Flat index of the mode `-k`.
    pub fn negated_index(&self, flat: usize) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        let mut rem = flat;
        let mut parts = vec![0usize; self.ndim()];
        for ax in (0..self.ndim()).rev() {
            parts[ax] = rem % self.shape[ax];
            rem /= self.shape[ax];
        }
        for ax in (0..self.ndim()).rev() {
            let n = self.shape[ax];
            idx += ((n - parts[ax]) % n) * stride;
            stride *= n;
        }
        idx
    }
}

fn fft_1d_in_place(buf: &mut [Complex64], dir: Direction) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Adjoint => 1.0,
    };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = sign * 2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // Twiddles computed directly rather than by recurrence to
                // keep roundoff at the 1e-15 level for large n.
                let w = Complex64::from_polar(1.0, step * k as f64);
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn apply_axes(data: &mut [Complex64], grid: &Grid, f: impl Fn(&mut [Complex64])) {
    match grid.shape() {
        [_] => f(data),
        [rows, cols] => {
            let (rows, cols) = (*rows, *cols);
            for r in 0..rows {
                f(&mut data[r * cols..(r + 1) * cols]);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); rows];
            for c in 0..cols {
                for r in 0..rows {
                    col[r] = data[r * cols + c];
                }
                f(&mut col);
                for r in 0..rows {
                    data[r * cols + c] = col[r];
                }
            }
        }
        _ => unreachable!("grid constructor limits dimensionality"),
    }
}

fn check_len(field: &[Complex64], grid: &Grid) -> Result<()> {
    if field.len() != grid.size() {
        return Err(Error::GridMismatch(format!(
            "field of length {} on grid {:?}",
            field.len(),
            grid.shape()
        )));
    }
    Ok(())
}

pub fn fft(field: &[Complex64], grid: &Grid, dir: Direction) -> Result<Vec<Complex64>> {
    check_len(field, grid)?;
    let mut out = field.to_vec();
    apply_axes(&mut out, grid, |b| fft_1d_in_place(b, dir));
    if dir == Direction::Adjoint {
        let s = 1.0 / grid.size() as f64;
        out.iter_mut().for_each(|v| *v *= s);
    }
    Ok(out)
}

/// Forward transform of a real field.
pub fn fft_real(field: &[f64], grid: &Grid) -> Result<Vec<Complex64>> {
    let c: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&c, grid, Direction::Forward)
}

/// O(N^2) reference transform with the same conventions as [`fft`].
pub fn dft_naive(field: &[Complex64], grid: &Grid, dir: Direction) -> Result<Vec<Complex64>> {
    check_len(field, grid)?;
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Adjoint => 1.0,
    };
    let shape = grid.shape();
    let coords = |flat: usize| -> Vec<usize> {
        let mut c = vec![0; shape.len()];
        let mut rem = flat;
        for ax in (0..shape.len()).rev() {
            c[ax] = rem % shape[ax];
            rem /= shape[ax];
        }
        c
    };
    let n = grid.size();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, o) in out.iter_mut().enumerate() {
        let kc = coords(k);
        for (x, v) in field.iter().enumerate() {
            let xc = coords(x);
            let phase: f64 = kc
                .iter()
                .zip(&xc)
                .zip(shape)
                .map(|((&a, &b), &m)| ((a * b) % m) as f64 / m as f64)
                .sum();
            *o += v * Complex64::from_polar(1.0, sign * 2.0 * PI * phase);
        }
        if dir == Direction::Adjoint {
            *o /= n as f64;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rng::Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn random_field(n: usize, rng: &mut Rng) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.normal(), rng.normal())).collect()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(Grid::new(&[6]), Err(Error::BadShape(_))));
        assert!(Grid::new(&[4, 3]).is_err());
        assert!(Grid::new(&[2, 2, 2]).is_err());
    }

    #[test]
    fn dc_and_impulse() {
        let g = Grid::new(&[8]).unwrap();
        let out = fft(&vec![c(1.0); 8], &g, Direction::Forward).unwrap();
        assert!((out[0] - c(8.0)).norm() < 1e-14);
        assert!(out[1..].iter().all(|v| v.norm() < 1e-14));
        let mut imp = vec![c(0.0); 8];
        imp[0] = c(1.0);
        let out = fft(&imp, &g, Direction::Forward).unwrap();
        assert!(out.iter().all(|v| (v - c(1.0)).norm() < 1e-15));
    }

    #[test]
    fn matches_naive_transform() {
        let mut rng = Rng::new(4);
        for shape in [vec![16], vec![8, 4], vec![2, 16]] {
            let g = Grid::new(&shape).unwrap();
            let f = random_field(g.size(), &mut rng);
            for dir in [Direction::Forward, Direction::Adjoint] {
                let a = fft(&f, &g, dir).unwrap();
                let b = dft_naive(&f, &g, dir).unwrap();
                assert!(max_diff(&a, &b) < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_all_sizes() {
        let mut rng = Rng::new(8);
        let mut shapes: Vec<Vec<usize>> = (0..=10).map(|p| vec![1usize << p]).collect();
        shapes.extend((0..=5).map(|p| vec![1usize << p, 1usize << (5 - p)]));
        shapes.push(vec![1024, 16]);
        for shape in shapes {
            let g = Grid::new(&shape).unwrap();
            let f = random_field(g.size(), &mut rng);
            let back = fft(&fft(&f, &g, Direction::Forward).unwrap(), &g, Direction::Adjoint)
                .unwrap();
            let scale = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(max_diff(&f, &back) <= 1e-12 * scale, "{shape:?}");
        }
    }

    #[test]
    fn wavevectors_and_negation() {
        let g = Grid::new(&[4, 8]).unwrap();
        assert_eq!(g.wavevector(0), vec![0, 0]);
        assert_eq!(g.wavevector(8 + 7), vec![1, -1]);
        assert_eq!(g.wavevector(2 * 8 + 4), vec![-2, -4]);
        for i in 0..g.size() {
            let k = g.wavevector(i);
            let j = g.negated_index(i);
            for ((a, b), &n) in k.iter().zip(g.wavevector(j)).zip(g.shape()) {
                assert_eq!((a + b).rem_euclid(n as i64), 0);
            }
            assert_eq!(g.negated_index(j), i);
        }
    }
}
