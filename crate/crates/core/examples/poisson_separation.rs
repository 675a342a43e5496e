//! Separating diffuse emission from point sources in Poisson counts
//! blurred by a point spread function.
//!
//! ```bash
//! cargo run --release --example poisson_separation -- 16
//! ```
//! The optional argument is the image side length (a power of two).

use geovi::cfmodel::{poisson_separation, PoissonSeparationConfig};
use geovi::inference::{moments, run_geovi};

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn main() -> geovi::Result<()> {
    let side = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let cfg = PoissonSeparationConfig { side, ..Default::default() };
    let bundle = poisson_separation(&cfg, 0)?;
    let truth = bundle.truth.clone().expect("synthetic data");
    println!("{side}x{side} image, {} latents", bundle.model.prior_dim());

    let state = run_geovi(&bundle.model, &bundle.tuning.variational_config(), 0)?;
    let samples = state.samples();
    let log = |v: Vec<f64>| v.into_iter().map(f64::ln).collect::<Vec<_>>();
    let diffuse = bundle.derived_samples("diffuse", &samples)?;
    let (dm, _) = moments(&diffuse.into_iter().map(log).collect::<Vec<_>>());
    let dt = log(bundle.derived("diffuse").expect("diffuse").apply(&truth)?);
    println!("log diffuse: correlation with truth {:.3}", correlation(&dm, &dt));

    let points = bundle.derived_samples("point_sources", &samples)?;
    let (pm, ps) = moments(&points);
    let pt = bundle.derived("point_sources").expect("points").apply(&truth)?;
    let mut order: Vec<usize> = (0..pt.len()).collect();
    order.sort_by(|&a, &b| pt[b].total_cmp(&pt[a]));
    println!("{:>8} {:>10} {:>10} {:>8}", "pixel", "true flux", "posterior", "sd");
    for &i in order.iter().take(8) {
        println!("{i:>8} {:>10.2} {:>10.2} {:>8.2}", pt[i], pm[i], ps[i]);
    }
    let bright = &order[..pt.len() / 10];
    let covered = bright.iter().filter(|&&i| (pm[i] - pt[i]).abs() <= 2.0 * ps[i]).count();
    println!("brightest decile within 2 sd: {covered}/{}", bright.len());
    Ok(())
}
