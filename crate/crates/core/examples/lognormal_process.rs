//! A log-normal process with unknown power spectrum and unknown noise
//! level, observed through a mask. Compares the noise-level posteriors of
//! geoVI and MGVI with the value the data were generated from.
//!
//! ```bash
//! cargo run --release --example lognormal_process -- 0
//! ```
//! The optional argument is the seed.

use geovi::cfmodel::{lognormal_process, LognormalProcessConfig};
use geovi::inference::{moments, run_variational, Method};

fn main() -> geovi::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = LognormalProcessConfig::default();
    let bundle = lognormal_process(&cfg, seed)?;
    println!(
        "{} pixels, {} latents, {} observed, true noise {}",
        cfg.pixels,
        bundle.model.prior_dim(),
        bundle.data.len(),
        cfg.true_noise
    );
    let vcfg = bundle.tuning.variational_config();
    for method in [Method::Geovi, Method::Mgvi] {
        let state = run_variational(&bundle.model, method, &vcfg, seed)?;
        let samples = state.samples();
        let sigma = bundle.derived_samples("sigma_n", &samples)?;
        let (m, s) = moments(&sigma);
        let truth = bundle.truth.as_ref().expect("synthetic data");
        let signal_truth = bundle.derived("signal").expect("signal").apply(truth)?;
        let signal = bundle.derived_samples("signal", &samples)?;
        let (sm, _) = moments(&signal);
        let rms = (sm.iter().zip(&signal_truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            / sm.len() as f64)
            .sqrt();
        println!(
            "{:>6}: sigma_n = {:.4} +- {:.4} ({:+.1} sd from truth), signal rms error {rms:.3}",
            method.label(),
            m[0],
            s[0],
            (m[0] - cfg.true_noise) / s[0]
        );
    }
    Ok(())
}
