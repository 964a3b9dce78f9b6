//! Scenario files, runs with their artifacts, sweeps and log validation.

mod config;
mod run;
mod sweep;
mod validate;

pub use config::{
    ConfigError, FilterConfig, InlineNode, NodeTraffic, Preset, RadioSpec, Scenario,
    ScenarioConfig, TopologySource, TrafficConfig,
};
pub use run::{
    run_scenario, simulate, RunError, RunOutput, MANIFEST_FILE, METRICS_FILE, QUEUES_FILE,
    SCHEDULE_LOG_FILE, TOPOLOGY_FILE,
};
pub use sweep::{per_bs_gbps, run_point, run_sweep, write_summary, SweepPoint, SweepSpec};
pub use validate::{validate_run_dir, validate_schedule_log, LogViolation, ValidationReport};
