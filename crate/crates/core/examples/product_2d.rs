//! Product of a normal and a log-normal variable: geoVI, MGVI and the
//! direct method against the brute-force posterior on a grid.
//!
//! ```bash
//! cargo run --release --example product_2d -- 3
//! ```
//! The optional argument is the number of seeds.

use geovi::cfmodel::product2d;
use geovi::inference::{
    direct_config, grid_kl, mgvi_density, posterior_density, run_direct_lowdim, run_variational,
    transform_density, Method,
};

fn main() -> geovi::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let bundle = product2d()?;
    let model = &bundle.model;
    let grid = bundle.oracle_grid.clone().expect("2D example has a grid");
    let p = posterior_density(model, &grid)?;

    let direct = run_direct_lowdim(model, &[0.0, 0.0], &direct_config())?;
    let q = transform_density(model, &direct.x, &direct.x, &grid)?;
    let (kl_direct, _) = grid_kl(&p, &q)?;
    println!("direct method at {:?}: KL(P;Q) = {kl_direct:.4}", direct.x);

    let cfg = bundle.tuning.variational_config();
    println!("{:>6} {:>12} {:>12}", "seed", "geoVI", "MGVI");
    for seed in 0..seeds {
        let geo = run_variational(model, Method::Geovi, &cfg, seed)?;
        let lin = run_variational(model, Method::Mgvi, &cfg, seed)?;
        let (kg, _) = grid_kl(&p, &transform_density(model, &geo.mean, &geo.mean, &grid)?)?;
        let (km, _) = grid_kl(&p, &mgvi_density(model, &lin.mean, &lin.mean, &grid)?)?;
        println!("{seed:>6} {kg:>12.4} {km:>12.4}");
    }
    Ok(())
}
