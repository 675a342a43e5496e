//! Newton-CG minimization and the sampled KL objective of geoVI/MGVI.

mod kl;
mod newton;

pub use kl::{averaged_metric_mvp, kl_value_grad, AveragedMetric, SampledKl};
pub use newton::{
    newton_cg, Evaluation, NewtonCgConfig, NewtonResult, Objective, StopReason, TraceEntry,
};
