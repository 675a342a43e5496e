//! Reference samples from Hamiltonian Monte Carlo next to geoVI on the
//! mean-variance model, whose posterior is strongly non-Gaussian.
//!
//! ```bash
//! cargo run --release --example hmc_reference
//! ```

use geovi::cfmodel::meanvar2d;
use geovi::inference::{hmc_reference, moments, run_geovi, HmcConfig};

fn main() -> geovi::Result<()> {
    let bundle = meanvar2d()?;
    let model = &bundle.model;
    let cfg = HmcConfig { samples_per_chain: 2000, ..Default::default() };
    let hmc = hmc_reference(model, &cfg, 0)?;
    let (hm, hs) = moments(&hmc.samples);
    println!(
        "HMC:   mean {:>8.4} {:>8.4}  sd {:>7.4} {:>7.4}  acceptance {:.2}",
        hm[0], hm[1], hs[0], hs[1], hmc.acceptance
    );

    let mut vcfg = bundle.tuning.variational_config();
    vcfg.n_final = 2000;
    let geo = run_geovi(model, &vcfg, 0)?;
    let (gm, gs) = moments(&geo.samples());
    println!("geoVI: mean {:>8.4} {:>8.4}  sd {:>7.4} {:>7.4}", gm[0], gm[1], gs[0], gs[1]);
    Ok(())
}
