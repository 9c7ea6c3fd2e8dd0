//! Monte Carlo experiments: scene sampling, per-trial evaluation of every
//! method, pilot-power and subarray sweeps, CSV output.

mod config;
mod sweep;
mod trial;

pub use config::{parse_methods, AngleLaw, ExperimentConfig, Method, RcsLaw, SceneLaw, SubarraySweep};
pub use sweep::{
    power_label, run_point, split_label, summarize, sweep_power, sweep_subarray, SweepRow, SweepTable,
    CSV_HEADER,
};
pub use trial::{
    run_trial, sample_scene, snap_scene, Experiment, MethodMetrics, MethodOutcome, OperatingPoint,
    TrialRecord,
};
