//! Prior draws of a correlated field with a learned power spectrum: the
//! amplitude spectrum at the prior mean is a power law, and random
//! hyperparameters bend it.
//!
//! ```bash
//! cargo run --release --example correlated_field
//! ```

use geovi::cfmodel::{CorrelatedField, SpectrumParams};
use geovi::diffmap::DifferentiableMap;
use geovi::linalg::{Grid, Rng};

fn main() -> geovi::Result<()> {
    let grid = Grid::new(&[64])?;
    let cf = CorrelatedField::new(SpectrumParams::default(), &grid)?;
    let spectrum = cf.spectrum().clone();
    let k: Vec<f64> = spectrum.bins().log_k.iter().map(|l| l.exp()).collect();
    let ns = cf.spectrum_dim();

    let mean_amp = spectrum.apply(&vec![0.0; ns])?;
    println!("amplitude at the prior mean (log-log slope should be constant):");
    for w in [1, 2, 4, 8, 16, 32] {
        if let Some(i) = k.iter().position(|&v| (v - w as f64).abs() < 1e-9) {
            println!("  |k| = {w:>2}: A = {:.4e}", mean_amp[i + 1]);
        }
    }

    let mut rng = Rng::new(4);
    for draw in 0..3 {
        let xi = rng.standard_normal(cf.dim_in());
        let s = cf.apply(&xi)?;
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / s.len() as f64).sqrt();
        let head: Vec<String> = s.iter().take(6).map(|v| format!("{v:+.2}")).collect();
        println!("draw {draw}: mean {mean:+.3}, sd {sd:.3}, first values {}", head.join(" "));
    }
    Ok(())
}
