use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ScenarioConfig;
use super::run::{RunError, MANIFEST_FILE, SCHEDULE_LOG_FILE, TOPOLOGY_FILE};
use crate::engine::ScheduleLogEntry;
use crate::node::check_schedule;
use crate::topology::{NodeId, TreeTopology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogViolation {
    pub subframe: u64,
    pub node: NodeId,
    pub constraint: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub entries: usize,
    pub violations: Vec<LogViolation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks every logged final schedule with the independent checker and
/// that each BS used the allocation its parent actually sent.
pub fn validate_schedule_log(
    topology: &TreeTopology,
    n_d: u32,
    entries: &[ScheduleLogEntry],
) -> ValidationReport {
    let mut report = ValidationReport {
        entries: entries.len(),
        ..Default::default()
    };
    if entries.is_empty() {
        report.warnings.push("schedule log is empty".into());
        return report;
    }
    let by_key: BTreeMap<(NodeId, u64), &ScheduleLogEntry> =
        entries.iter().map(|e| ((e.node, e.target), e)).collect();
    for e in entries {
        let mut flag = |constraint: String| {
            report.violations.push(LogViolation {
                subframe: e.target,
                node: e.node,
                constraint,
            })
        };
        if e.schedule.node != e.node || e.schedule.subframe != e.target {
            flag("schedule header does not match the log entry".into());
        }
        for v in check_schedule(
            topology,
            &e.schedule,
            e.parent_allocation.as_ref(),
            &e.caps,
            n_d,
        ) {
            flag(v.to_string());
        }
        if let Some(parent) = topology.parent(e.node) {
            match by_key.get(&(parent, e.target)) {
                Some(p) if p.schedule.allocation(e.node) != e.parent_allocation.as_ref() => {
                    flag(format!(
                        "parent-link allocation differs from the schedule of node {parent}"
                    ));
                }
                None => flag(format!("no schedule of parent {parent} for this subframe")),
                _ => {}
            }
        }
    }
    report
}

/// Validates the schedule log of a run directory against its topology.
pub fn validate_run_dir(dir: &Path) -> Result<ValidationReport, RunError> {
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| RunError::Io { path: p, source: e })
    };
    let topology = TreeTopology::from_text(&read(TOPOLOGY_FILE)?)
        .map_err(|e| super::config::ConfigError::new(TOPOLOGY_FILE, e))?;
    let manifest = ScenarioConfig::from_toml_str(&read(MANIFEST_FILE)?)?;
    let mut entries = Vec::new();
    for (i, line) in read(SCHEDULE_LOG_FILE)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: ScheduleLogEntry = serde_json::from_str(line).map_err(|e| {
            super::config::ConfigError::new(SCHEDULE_LOG_FILE, format!("line {}: {e}", i + 1))
        })?;
        entries.push(entry);
    }
    Ok(validate_schedule_log(
        &topology,
        manifest.data_slots(),
        &entries,
    ))
}
