//! Experiment configuration: a strict TOML file merged with flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cfmodel::{Tuning, EXAMPLE_NAMES};
use crate::error::{Error, Result};
use crate::geometry::StartMode;
use crate::inference::{HmcConfig, VariationalConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMethod {
    Geovi,
    Mgvi,
    Direct,
    Hmc,
}

impl RunMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "geovi" => Ok(RunMethod::Geovi),
            "mgvi" => Ok(RunMethod::Mgvi),
            "direct" => Ok(RunMethod::Direct),
            "hmc" => Ok(RunMethod::Hmc),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RunMethod::Geovi => "geovi",
            RunMethod::Mgvi => "mgvi",
            RunMethod::Direct => "direct",
            RunMethod::Hmc => "hmc",
        }
    }
}

/// Overrides of the geoVI/MGVI loop; unset fields keep library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalOverrides {
    pub n_draws: Option<usize>,
    pub antithetic: Option<bool>,
    pub max_outer: Option<usize>,
    pub kl_rel_tol: Option<f64>,
    pub shift_tol: Option<f64>,
    pub init_scale: Option<f64>,
    pub warmup: Option<usize>,
    pub newton_max_iter: Option<usize>,
    pub sampler_tol: Option<f64>,
    pub sampler_max_iter: Option<usize>,
    pub accept_tol: Option<f64>,
    pub start: Option<StartMode>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmcOverrides {
    pub chains: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub step_size: Option<f64>,
    pub n_leapfrog: Option<usize>,
    pub target_accept: Option<f64>,
    pub init_scale: Option<f64>,
}

/// A fully specified run. `method` is kept as text so that an unknown
/// method is reported as such rather than as a parse error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: String,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub size: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Final sample count.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub variational: VariationalOverrides,
    #[serde(default)]
    pub hmc: HmcOverrides,
}

fn default_method() -> String {
    "geovi".into()
}

/// Default number of final samples.
pub const DEFAULT_SAMPLES: usize = 100;

impl ExperimentConfig {
    pub fn new(example: &str, method: RunMethod, seed: u64) -> Self {
        ExperimentConfig {
            example: example.into(),
            method: method.label().into(),
            seed,
            size: None,
            out: None,
            samples: None,
            threads: None,
            variational: VariationalOverrides::default(),
            hmc: HmcOverrides::default(),
        }
    }

    /// Reads a TOML file; unknown keys are errors.
    pub fn from_file(path: &Path) -> Result<toml::Table> {
        let text = std::fs::read_to_string(path)?;
        text.parse::<toml::Table>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !EXAMPLE_NAMES.contains(&self.example.as_str()) {
            return Err(Error::UnknownExample(self.example.clone()));
        }
        RunMethod::parse(&self.method)?;
        if self.samples == Some(0) {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn run_method(&self) -> Result<RunMethod> {
        RunMethod::parse(&self.method)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            PathBuf::from("runs").join(format!("{}-{}-{}", self.example, self.method, self.seed))
        })
    }

    pub fn n_samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    /// Library defaults, then the example's suggestions, then overrides.
    pub fn variational_config(&self, tuning: &Tuning) -> VariationalConfig {
        let o = &self.variational;
        let mut cfg = VariationalConfig {
            n_final: self.n_samples(),
            ..tuning.variational_config()
        };
        if let Some(v) = o.init_scale {
            cfg.init_scale = v;
        }
        if let Some(v) = o.warmup {
            cfg.warmup = v;
        }
        if let Some(v) = o.accept_tol {
            cfg.sampler.accept_tol = v;
        }
        if let Some(v) = o.n_draws {
            cfg.n_draws = v;
        }
        if let Some(v) = o.antithetic {
            cfg.antithetic = v;
        }
        if let Some(v) = o.max_outer {
            cfg.max_outer = v;
        }
        if let Some(v) = o.kl_rel_tol {
            cfg.kl_rel_tol = v;
        }
        if let Some(v) = o.shift_tol {
            cfg.shift_tol = v;
        }
        if let Some(v) = o.newton_max_iter {
            cfg.newton.max_iter = v;
        }
        if let Some(v) = o.sampler_tol {
            cfg.sampler.tol = v;
        }
        if let Some(v) = o.sampler_max_iter {
            cfg.sampler.max_iter = v;
        }
        if let Some(v) = o.start {
            cfg.sampler.start = v;
        }
        cfg
    }

    pub fn hmc_config(&self) -> HmcConfig {
        let o = &self.hmc;
        let d = HmcConfig::default();
        let chains = o.chains.unwrap_or(d.chains).max(1);
        HmcConfig {
            chains,
            samples_per_chain: self.n_samples().div_ceil(chains),
            burn_in: o.burn_in.unwrap_or(d.burn_in),
            thin: o.thin.unwrap_or(d.thin),
            step_size: o.step_size.unwrap_or(d.step_size),
            n_leapfrog: o.n_leapfrog.unwrap_or(d.n_leapfrog),
            target_accept: o.target_accept.or(d.target_accept),
            init_scale: o.init_scale.unwrap_or(d.init_scale),
        }
    }
}
