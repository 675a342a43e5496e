//! On a linear-Gaussian model the transformation is linear, so geoVI and
//! MGVI coincide and both reproduce the conjugate posterior.
//!
//! ```bash
//! cargo run --release --example linear_limit
//! ```

use geovi::cfmodel::{linear_gaussian, linear_posterior};
use geovi::geometry::{ExpansionPoint, SamplerConfig};
use geovi::inference::{draw_residual_set, run_variational, Method, VariationalConfig};

fn covariance(rs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rs[0].len();
    let mut c = vec![vec![0.0; n]; n];
    for r in rs {
        for i in 0..n {
            for j in 0..n {
                c[i][j] += r[i] * r[j] / rs.len() as f64;
            }
        }
    }
    c
}

fn main() -> geovi::Result<()> {
    let bundle = linear_gaussian(8, 12, 3)?;
    let model = &bundle.model;
    let (mean, cov) = linear_posterior(&bundle)?;

    for method in [Method::Geovi, Method::Mgvi] {
        let state = run_variational(model, method, &VariationalConfig::default(), 0)?;
        let err = state.mean.iter().zip(&mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let ep = ExpansionPoint::new(model, &state.mean)?;
        let (draws, _) =
            draw_residual_set(model, &ep, method, 2000, true, &SamplerConfig::default(), 1, 0)?;
        let rs: Vec<Vec<f64>> = draws.into_iter().map(|d| d.r).collect();
        let c = covariance(&rs);
        let mut worst: f64 = 0.0;
        for i in 0..mean.len() {
            worst = worst.max((c[i][i] / cov[(i, i)] - 1.0).abs());
        }
        println!(
            "{}: mean error {err:.2e}, worst relative variance error {worst:.3} over {} draws",
            method.label(),
            rs.len()
        );
    }
    Ok(())
}
