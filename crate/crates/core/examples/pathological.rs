//! Failure modes: a heavy-tailed posterior approximated from a poor
//! expansion point, and a bimodal posterior of which geoVI captures only
//! one mode.
//!
//! ```bash
//! cargo run --release --example pathological
//! ```

use geovi::cfmodel::{bimodal1d, sigmoid1d};
use geovi::inference::{grid_kl, posterior_density, transform_density};

fn main() -> geovi::Result<()> {
    let bundle = sigmoid1d()?;
    let grid = bundle.oracle_grid.clone().expect("1D grid");
    let p = posterior_density(&bundle.model, &grid)?;
    for xb in [-0.68, -0.1] {
        let q = transform_density(&bundle.model, &[xb], &[xb], &grid)?;
        let (pq, qp) = grid_kl(&p, &q)?;
        println!("sigmoid, expansion at {xb:>5}: KL(P;Q) {pq:.4}, KL(Q;P) {qp:.4}");
    }

    let bundle = bimodal1d()?;
    let grid = bundle.oracle_grid.clone().expect("1D grid");
    let p = posterior_density(&bundle.model, &grid)?;
    let xb = 1.08;
    let q = transform_density(&bundle.model, &[xb], &[xb], &grid)?;
    println!(
        "bimodal: posterior has {} modes, approximation has {}",
        p.count_modes_1d(1e-3)?,
        q.count_modes_1d(1e-3)?
    );
    println!(
        "bimodal: approximation mass on the positive side {:.4}, posterior mass {:.4}",
        q.mass_where(|x| x[0] > 0.0),
        p.mass_where(|x| x[0] > 0.0)
    );
    Ok(())
}
