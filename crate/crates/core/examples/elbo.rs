//! Evidence lower bounds from geoVI samples next to the grid evidence.
//!
//! ```bash
//! cargo run --release --example elbo
//! ```

use geovi::cfmodel::{linear_gaussian, lognormal1d, product2d};
use geovi::inference::{elbo, grid_log_evidence, run_geovi};

fn main() -> geovi::Result<()> {
    for bundle in [lognormal1d()?, product2d()?] {
        let mut cfg = bundle.tuning.variational_config();
        cfg.n_final = 2000;
        let state = run_geovi(&bundle.model, &cfg, 0)?;
        let est = elbo(&bundle.model, &state)?;
        let grid = bundle.oracle_grid.as_ref().expect("low-dimensional example");
        let evidence = grid_log_evidence(&bundle.model, grid)?;
        println!(
            "{:>12}: ELBO {:.4} +- {:.4}, log evidence {evidence:.4}",
            bundle.name, est.value, est.std_error
        );
    }

    // Linear model: the bound is tight and the evidence is analytic.
    let bundle = linear_gaussian(6, 10, 2)?;
    let mut cfg = bundle.tuning.variational_config();
    cfg.n_final = 2000;
    let state = run_geovi(&bundle.model, &cfg, 0)?;
    let est = elbo(&bundle.model, &state)?;
    println!("      linear: ELBO {:.4} +- {:.4}", est.value, est.std_error);
    Ok(())
}
