use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ChildInput, ChildReport, DemandReport, FinalSchedule, QueueState, ReportingFilter};
use crate::topology::{NodeId, TreeTopology};

/// A parent's final schedule as held by the child, with the subframe whose
/// control phase delivered it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceivedSchedule {
    pub schedule: FinalSchedule,
    pub received_at: u64,
}

/// Everything one BS knows. Only the engine mutates it, and only with
/// information the BS could have observed itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: NodeId,
    pub queues: QueueState,
    pub filter: ReportingFilter,
    /// Latest report from each child.
    pub child_reports: BTreeMap<NodeId, ChildReport>,
    /// Parent's final schedules keyed by target subframe.
    pub parent_schedules: BTreeMap<u64, ReceivedSchedule>,
    /// Final schedules this BS computed for its child links.
    pub own_schedules: BTreeMap<u64, FinalSchedule>,
    /// Reported parent-link slot cap from the last local schedule.
    pub reported_n_hat: u32,
}

impl BaseStation {
    pub fn new(id: NodeId, filter: ReportingFilter) -> Self {
        Self {
            id,
            queues: QueueState::default(),
            filter,
            child_reports: BTreeMap::new(),
            parent_schedules: BTreeMap::new(),
            own_schedules: BTreeMap::new(),
            reported_n_hat: 0,
        }
    }

    /// Subtree demands as reported by each child (absent children omitted).
    pub fn child_demands(&self) -> BTreeMap<NodeId, DemandReport> {
        self.child_reports
            .iter()
            .map(|(&c, r)| (c, r.demand))
            .collect()
    }

    /// Subtree demand this BS reports upward.
    pub fn subtree_demand(&self, own: DemandReport) -> DemandReport {
        self.child_reports
            .values()
            .fold(own, |acc, r| acc + r.demand)
    }

    /// Per-child inputs for the final-schedule program, ascending by child.
    pub fn child_inputs(&self, topology: &TreeTopology) -> Vec<ChildInput> {
        topology
            .children(self.id)
            .iter()
            .map(|&child| {
                let report = self.child_reports.get(&child);
                ChildInput {
                    child,
                    queue_down: self.queues.downlink_for(child),
                    queue_up: report.map(|r| r.uplink_queue).unwrap_or(0),
                    demand: report.map(|r| r.demand).unwrap_or_default(),
                    n_hat: report.map(|r| r.local.n_hat),
                }
            })
            .collect()
    }

    /// Drops schedules for subframes that have already run.
    pub fn forget_before(&mut self, subframe: u64) {
        self.parent_schedules = self.parent_schedules.split_off(&subframe);
        self.own_schedules = self.own_schedules.split_off(&subframe);
    }
}
