//! One-dimensional log-normal posterior: how the choice of expansion point
//! changes the quality of the transform-based approximation.
//!
//! ```bash
//! cargo run --release --example lognormal_1d
//! ```

use geovi::cfmodel::lognormal1d;
use geovi::inference::{
    direct_config, grid_kl, optimal_normal, posterior_density, run_direct_lowdim,
    transform_density, moment_matched_normal,
};

fn main() -> geovi::Result<()> {
    let bundle = lognormal1d()?;
    let model = &bundle.model;
    let grid = bundle.oracle_grid.clone().expect("1D example has a grid");
    let p = posterior_density(model, &grid)?;

    let direct = run_direct_lowdim(model, &[0.0], &direct_config())?;
    println!("direct-method expansion point: {:.4}", direct.x[0]);

    println!("{:>24} {:>10} {:>10}", "approximation", "KL(P;Q)", "KL(Q;P)");
    let mut points = vec![-1.0, -0.6, -0.2];
    points.push(direct.x[0]);
    for xb in points {
        let q = transform_density(model, &[xb], &[xb], &grid)?;
        let (pq, qp) = grid_kl(&p, &q)?;
        println!("{:>24} {pq:>10.4} {qp:>10.4}", format!("expansion at {xb:.3}"));
    }
    for (label, q) in [
        ("variational normal", optimal_normal(&p)?),
        ("moment-matched normal", moment_matched_normal(&p)?),
    ] {
        let (pq, qp) = grid_kl(&p, &q)?;
        println!("{label:>24} {pq:>10.4} {qp:>10.4}");
    }
    Ok(())
}
