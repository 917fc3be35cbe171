//! Time integration: IMEX with frozen coefficients, an RK4 oracle, the
//! Picard fixed-point map and scripted experiments.

pub mod config;
pub mod experiments;
pub mod picard;
pub mod run;
pub mod step;

pub use config::{FreezePolicy, Scheme, SchemeConfig};
pub use experiments::{
    experiment_peskin_decay, experiment_smoothing, experiment_stability, PeskinDecayReport,
    SmoothingReport, SmoothingSetup, StabilityReport, STABILITY_BOUND,
};
pub use picard::{picard_iterate, plug_back_residual, trace_norm, PicardConfig, PicardResult};
pub use run::{run, run_with, RunOptions, RunResult, StepRecord};
pub use step::{
    mean_coefficient, min_coefficient, min_eigen_coefficient, step_imex_muskat, step_imex_peskin,
    step_rk4, Model, MuskatModel, PeskinModel, SourceFn,
};
