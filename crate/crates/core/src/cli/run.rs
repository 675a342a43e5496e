//! The `run` subcommand: one example, one method, all artifacts.

use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, RunMethod};
use super::output::{columns, hex_digest, names, OutputDir};
use crate::cfmodel::{make_example, ExampleBundle};
use crate::error::{Error, Result};
use crate::geometry::ExpansionPoint;
use crate::inference::{
    direct_config, draw_residual_set, elbo, grid_kl, grid_log_evidence, hmc_reference,
    mgvi_density, moment_matched_normal, moments, optimal_normal, posterior_density,
    run_direct_lowdim, run_variational, transform_density, ApproximationState, ElboEstimate,
    GridDensity, Method, OuterStep,
};

#[derive(Clone, Debug, Serialize)]
pub struct KlRow {
    pub approximation: String,
    pub kl_pq: f64,
    pub kl_qp: f64,
}

/// What a run produced, in memory as well as on disk.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub out_dir: std::path::PathBuf,
    pub method: RunMethod,
    pub mean: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub kl_table: Vec<KlRow>,
    pub elbo: Option<ElboEstimate>,
    pub log_evidence: Option<f64>,
    pub trace: Vec<OuterStep>,
    pub converged: bool,
    pub config_hash: String,
}

struct Fit {
    mean: Vec<f64>,
    samples: Vec<Vec<f64>>,
    state: Option<ApproximationState>,
    extra: serde_json::Value,
}

fn fit(bundle: &ExampleBundle, cfg: &ExperimentConfig, method: RunMethod) -> Result<Fit> {
    let model = &bundle.model;
    let vcfg = cfg.variational_config(&bundle.tuning);
    match method {
        RunMethod::Geovi | RunMethod::Mgvi => {
            let m = if method == RunMethod::Geovi { Method::Geovi } else { Method::Mgvi };
            let state = run_variational(model, m, &vcfg, cfg.seed)?;
            Ok(Fit {
                mean: state.mean.clone(),
                samples: state.samples(),
                extra: json!({ "outer_iterations": state.trace.len() }),
                state: Some(state),
            })
        }
        RunMethod::Direct => {
            let res = run_direct_lowdim(model, &vec![0.0; model.prior_dim()], &direct_config())?;
            let ep = ExpansionPoint::new(model, &res.x)?;
            let groups = if vcfg.antithetic { vcfg.n_final.div_ceil(2) } else { vcfg.n_final };
            let (draws, _) = draw_residual_set(
                model,
                &ep,
                Method::Geovi,
                groups,
                vcfg.antithetic,
                &vcfg.sampler,
                cfg.seed,
                u64::MAX,
            )?;
            let state = ApproximationState {
                method: Method::Geovi,
                mean: res.x.clone(),
                residuals: draws.into_iter().map(|d| d.r).collect(),
                antithetic: vcfg.antithetic,
                trace: Vec::new(),
                converged: res.converged(),
            };
            Ok(Fit {
                mean: res.x,
                samples: state.samples(),
                extra: json!({ "newton_steps": res.trace.len(), "objective": res.value }),
                state: Some(state),
            })
        }
        RunMethod::Hmc => {
            let hcfg = cfg.hmc_config();
            let res = hmc_reference(model, &hcfg, cfg.seed)?;
            let (mean, _) = moments(&res.samples);
            Ok(Fit {
                mean,
                samples: res.samples,
                state: None,
                extra: json!({
                    "acceptance": res.acceptance,
                    "step_sizes": res.step_sizes,
                    "max_energy_error": res.max_energy_error,
                }),
            })
        }
    }
}

fn approximation_density(bundle: &ExampleBundle, method: RunMethod, mean: &[f64]) -> Result<Option<GridDensity>> {
    let grid = match &bundle.oracle_grid {
        Some(g) => g,
        None => return Ok(None),
    };
    let model = &bundle.model;
    Ok(match method {
        RunMethod::Geovi | RunMethod::Direct => Some(transform_density(model, mean, mean, grid)?),
        RunMethod::Mgvi => Some(mgvi_density(model, mean, mean, grid)?),
        RunMethod::Hmc => None,
    })
}

/// Runs one experiment and writes its artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let method = cfg.run_method()?;
    let config_json = serde_json::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let config_hash = hex_digest(config_json.as_bytes());
    let bundle = make_example(&cfg.example, cfg.size, cfg.seed)?;
    let model = &bundle.model;
    let dim = model.prior_dim();
    log::info!("{} with {}: {dim} latent dimensions", bundle.name, method.label());

    let f = fit(&bundle, cfg, method)?;
    let mut out = OutputDir::create(&cfg.out_dir())?;

    out.matrix("samples.csv", &columns("xi", dim), &f.samples)?;
    let (smean, sstd) = moments(&f.samples);
    let summary: Vec<Vec<String>> = (0..dim)
        .map(|i| {
            vec![
                i.to_string(),
                f.mean[i].to_string(),
                smean[i].to_string(),
                sstd[i].to_string(),
                bundle.truth.as_ref().map_or(String::new(), |t| t[i].to_string()),
            ]
        })
        .collect();
    out.csv("summary.csv", &names(&["coordinate", "shift", "mean", "std", "truth"]), &summary)?;

    let mut trace = Vec::new();
    let mut converged = true;
    if let Some(state) = &f.state {
        trace = state.trace.clone();
        converged = state.converged;
        if !trace.is_empty() {
            let rows: Vec<Vec<String>> = trace
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    vec![
                        i.to_string(),
                        t.kl.to_string(),
                        t.shift_norm.to_string(),
                        t.newton_steps.to_string(),
                        t.max_misfit.to_string(),
                        t.failed_draws.to_string(),
                    ]
                })
                .collect();
            let header = names(&["iteration", "kl", "shift_norm", "newton_steps", "max_misfit", "failed_draws"]);
            out.csv("trace.csv", &header, &rows)?;
        }
    }

    // Grid oracle: densities, KL table, evidence.
    let mut kl_table = Vec::new();
    let mut log_evidence = None;
    if let Some(grid) = &bundle.oracle_grid {
        let p = posterior_density(model, grid)?;
        let q = approximation_density(&bundle, method, &f.mean)?;
        if let Some(q) = &q {
            let (a, b) = grid_kl(&p, q)?;
            kl_table.push(KlRow { approximation: method.label().into(), kl_pq: a, kl_qp: b });
        }
        for (label, base) in [("normal", optimal_normal(&p)?), ("moment-normal", moment_matched_normal(&p)?)] {
            let (a, b) = grid_kl(&p, &base)?;
            kl_table.push(KlRow { approximation: label.into(), kl_pq: a, kl_qp: b });
        }
        let rows: Vec<Vec<String>> = kl_table
            .iter()
            .map(|r| vec![r.approximation.clone(), r.kl_pq.to_string(), r.kl_qp.to_string()])
            .collect();
        out.csv("kl_table.csv", &names(&["approximation", "kl_pq", "kl_qp"]), &rows)?;

        let pd = p.density();
        let qd = q.as_ref().map(|q| q.density());
        let mut header = columns("x", grid.ndim());
        header.extend(names(&["p", "q"]));
        let rows: Vec<Vec<f64>> = (0..grid.len())
            .map(|i| {
                let mut r = grid.point(i);
                r.push(pd[i]);
                r.push(qd.as_ref().map_or(f64::NAN, |q| q[i]));
                r
            })
            .collect();
        out.matrix("densities.csv", &header, &rows)?;
        log_evidence = Some(grid_log_evidence(model, grid)?);
    }

    // Derived quantities.
    for d in &bundle.derived {
        let vals = bundle.derived_samples(&d.name, &f.samples)?;
        let truth = bundle.truth.as_ref().map(|t| d.map.apply(t)).transpose()?;
        let (m, s) = moments(&vals);
        let k = if d.name == "power_spectrum" { bundle.spectrum_k.clone() } else { None };
        let rows: Vec<Vec<String>> = (0..m.len())
            .map(|i| {
                vec![
                    k.as_ref().map_or(i.to_string(), |k| k[i].to_string()),
                    m[i].to_string(),
                    s[i].to_string(),
                    truth.as_ref().map_or(String::new(), |t| t[i].to_string()),
                ]
            })
            .collect();
        let first = if k.is_some() { "k" } else { "index" };
        out.csv(&format!("{}.csv", d.name), &names(&[first, "mean", "std", "truth"]), &rows)?;
        if d.name == "power_spectrum" || d.name == "sigma_n" {
            let header = match &k {
                Some(k) => k.iter().map(|v| format!("k={v}")).collect(),
                None => columns(&d.name, m.len()),
            };
            out.matrix(&format!("{}_samples.csv", d.name), &header, &vals)?;
        }
        if d.name == "sigma_n" {
            let xs: Vec<f64> = vals.iter().map(|v| v[0]).collect();
            out.matrix("sigma_n_marginal.csv", &names(&["lo", "hi", "density"]), &histogram(&xs, 40))?;
        }
    }

    let elbo_est = match &f.state {
        Some(state) => match elbo(model, state) {
            Ok(e) => Some(e),
            Err(Error::DimensionTooLarge { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };

    let manifest = json!({
        "tool": "geovi",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "config_hash": config_hash,
        "seed": cfg.seed,
        "streams": "per-draw streams derive(seed, [iteration, draw]); final set uses iteration u64::MAX; initial shift u64::MAX - 1; HMC chain c uses derive(seed, [c])",
        "example": bundle.summary(),
        "method": method.label(),
        "latent_dim": dim,
        "samples": f.samples.len(),
        "converged": converged,
        "details": f.extra,
        "grid": bundle.oracle_grid,
        "kl_table": kl_table,
        "log_evidence_grid": log_evidence,
        "elbo": elbo_est,
        "files": out.files(),
    });
    out.json("manifest.json", &manifest)?;

    Ok(RunReport {
        out_dir: out.root().to_path_buf(),
        method,
        mean: f.mean,
        samples: f.samples,
        kl_table,
        elbo: elbo_est,
        log_evidence,
        trace,
        converged,
        config_hash,
    })
}

/// Equal-width histogram normalized to unit area: rows `(lo, hi, density)`.
pub fn histogram(xs: &[f64], bins: usize) -> Vec<Vec<f64>> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() || !(hi > lo) {
        return vec![vec![lo, hi, f64::NAN]];
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        counts[(((x - lo) / w) as usize).min(bins - 1)] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| vec![lo + i as f64 * w, lo + (i + 1) as f64 * w, c as f64 / (xs.len() as f64 * w)])
        .collect()
}

/// Joins two runs' KL tables on the approximation label.
pub fn compare_runs(a: &std::path::Path, b: &std::path::Path) -> Result<Vec<(String, Option<f64>, Option<f64>)>> {
    let read = |dir: &std::path::Path| -> Result<Vec<(String, f64)>> {
        let text = std::fs::read_to_string(dir.join("kl_table.csv"))?;
        text.lines()
            .skip(1)
            .filter(|l| !l.is_empty())
            .map(|l| {
                let parts: Vec<&str> = l.split(',').collect();
                let v = parts
                    .get(1)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::BadData(format!("malformed KL row {l:?}")))?;
                Ok((parts[0].to_string(), v))
            })
            .collect()
    };
    let (ta, tb) = (read(a)?, read(b)?);
    let mut labels: Vec<String> = ta.iter().map(|r| r.0.clone()).collect();
    for (l, _) in &tb {
        if !labels.contains(l) {
            labels.push(l.clone());
        }
    }
    Ok(labels
        .into_iter()
        .map(|l| {
            let va = ta.iter().find(|r| r.0 == l).map(|r| r.1);
            let vb = tb.iter().find(|r| r.0 == l).map(|r| r.1);
            (l, va, vb)
        })
        .collect())
}
