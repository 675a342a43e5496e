//! Numerical substrate: flat vectors, seeded random streams, implicit
//! linear operators, conjugate gradient, small dense helpers and FFTs on
//! periodic grids.

pub mod cg;
pub mod dense;
pub mod fft;
pub mod operator;
pub mod rng;
pub mod vector;

pub use cg::{cg_solve, CgConfig, CgSolution};
pub use dense::{cholesky_logdet, dense_limit, materialize, DenseMatrix};
pub use fft::{dft_naive, fft, Direction, Grid};
pub use operator::{
    adjoint_probe, DenseOperator, FnOperator, IdentityOperator, ImplicitOperator, OperatorRef,
};
pub use rng::Rng;
