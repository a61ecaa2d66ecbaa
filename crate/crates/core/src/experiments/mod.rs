//! Scenario runner, robustness sweeps, delay estimates and file output.

pub mod config;
pub mod estimate;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config, parse_str, resolve_output_dir, Perturbations, Scenario, Series};
pub use estimate::{fig9_train, interpulse_estimate, write_train, DelayEstimate, DelayMoments, Regime, TrainConfig, TrainResult};
pub use presets::{preset, PRESETS};
pub use run::{
    evaluate_schedule, perturb_schedule, robustness_area, robustness_timing, run_scenario, ScenarioReport,
    ScheduleOutcome, Summary, SweepAxis, SweepResult, SweepRow,
};
