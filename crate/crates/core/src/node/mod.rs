//! Per-BS scheduling logic: local schedules, final valid schedules, the
//! downlink/uplink split, slot placement and packet selection.

mod filter;
mod packets;
mod queues;
mod schedule;
mod station;

pub use filter::ReportingFilter;
pub use packets::{apportion, fill_packets, PacketBatch};
pub use queues::QueueState;
pub use schedule::{
    check_schedule, place_slots, place_slots_with_repair, split_directions, Direction,
    FinalSchedule, LinkAllocation, Placement, PlacementRequest, ScheduleError, ScheduleViolation,
    SlotUse,
};
pub use station::{BaseStation, ReceivedSchedule};

use std::collections::BTreeMap;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimizer::{
    solve_max_scale, solve_max_slots, LinkEntry, ParentReservation, Scale, ScheduleProblem,
    SolverError,
};
use crate::topology::{NodeId, TreeTopology};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NodeError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("node {0} is not a small-cell BS")]
    NotSmallCell(NodeId),
    #[error("node {0} has no child links to schedule")]
    NoChildren(NodeId),
    #[error("no parent schedule for subframe {0}")]
    NoParentSchedule(u64),
}

/// Traffic demand in bits per subframe, aggregated over a subtree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandReport {
    pub downlink: u64,
    pub uplink: u64,
}

impl DemandReport {
    pub fn total(&self) -> u64 {
        self.downlink + self.uplink
    }
}

impl Add for DemandReport {
    type Output = DemandReport;

    fn add(self, rhs: Self) -> Self {
        Self {
            downlink: self.downlink + rhs.downlink,
            uplink: self.uplink + rhs.uplink,
        }
    }
}

/// Desired slot count for the reporting BS's parent link.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalScheduleReport {
    pub n_hat: u32,
}

/// Everything a child sends up in the first control slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildReport {
    /// Uplink packets queued at the child.
    pub uplink_queue: u64,
    pub demand: DemandReport,
    pub local: LocalScheduleReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalSchedule {
    pub scale: Scale,
    /// Raw minimal parent-link slot count at the optimal scale.
    pub n_hat: u32,
}

/// Solves the local-schedule program of small-cell BS `node`: its parent
/// link must carry `scale` of the whole subtree demand and each child link
/// `scale` of that child's demand. Children without a report count as idle.
pub fn compute_local_schedule(
    topology: &TreeTopology,
    node: NodeId,
    own: DemandReport,
    children: &BTreeMap<NodeId, DemandReport>,
    n_d: u32,
) -> Result<LocalSchedule, NodeError> {
    if node.is_macro() {
        return Err(NodeError::NotSmallCell(node));
    }
    let kids = topology.children(node);
    let mut links = Vec::with_capacity(kids.len());
    let mut total = own.total();
    for &c in kids {
        let d = children.get(&c).map(DemandReport::total).unwrap_or(0);
        total += d;
        links.push(LinkEntry::local(d, topology.alpha(c), n_d));
    }
    let m = kids.len() + 1;
    let mut interference = vec![vec![false; m]; m];
    for (a, &ca) in kids.iter().enumerate() {
        for (b, &cb) in kids.iter().enumerate() {
            interference[a][b] = a != b && topology.interferes(ca, cb);
        }
        let with_parent = topology.interferes(ca, node);
        interference[a][m - 1] = with_parent;
        interference[m - 1][a] = with_parent;
    }
    let problem = ScheduleProblem {
        links,
        aggregate: Some(LinkEntry::local(total, topology.alpha(node), n_d)),
        interference,
        n_d,
        rate: topology.rate_per_slot(),
        radio_budget: n_d * topology.radio_chains(node),
        parent: None,
    };
    let sol = solve_max_scale(&problem)?;
    let n_hat = sol.aggregate_slots(&problem).unwrap_or(0);
    Ok(LocalSchedule {
        scale: sol.scale,
        n_hat,
    })
}

/// What the scheduling BS knows about one child link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChildInput {
    pub child: NodeId,
    /// Downlink packets queued at the scheduling BS for the child's subtree.
    pub queue_down: u64,
    /// Uplink packets queued at the child, as last reported.
    pub queue_up: u64,
    pub demand: DemandReport,
    /// Last reported slot cap; `None` if the child never reported.
    pub n_hat: Option<u32>,
}

pub struct FinalScheduleInput<'a> {
    pub topology: &'a TreeTopology,
    pub node: NodeId,
    pub target: u64,
    pub n_d: u32,
    /// One entry per child link, ascending by child id.
    pub children: &'a [ChildInput],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalOutcome {
    pub schedule: FinalSchedule,
    pub scale: Scale,
    /// Slot total of the scale-maximising witness.
    pub base_slots: u32,
    /// Slot total after the optional slot-maximising pass, before placement.
    pub solved_slots: u32,
    /// Slots given up during placement.
    pub repairs: u32,
    /// Active links deferred because the program was infeasible with them.
    pub deferred: u32,
    /// Caps the allocation was bounded by, per child link.
    pub caps: Vec<(NodeId, u32)>,
}

/// Final valid schedule at the macro-cell BS: maximise the common scale of
/// the queue-bounded demands, then optionally fill spare slots while keeping
/// that scale.
pub fn compute_final_schedule_macro(
    input: &FinalScheduleInput<'_>,
    enhancement: bool,
) -> Result<FinalOutcome, NodeError> {
    if !input.node.is_macro() {
        return Err(NodeError::Solver(SolverError::Malformed(format!(
            "node {} is not the macro-cell BS",
            input.node
        ))));
    }
    compute_final(input, None, enhancement)
}

/// Final valid schedule at a non-leaf small-cell BS, bounded by the slots its
/// parent already gave to its own parent link in `parent_final`.
pub fn compute_final_schedule_nonleaf(
    input: &FinalScheduleInput<'_>,
    parent_final: Option<&FinalSchedule>,
) -> Result<FinalOutcome, NodeError> {
    if input.node.is_macro() {
        return Err(NodeError::NotSmallCell(input.node));
    }
    let parent_final = parent_final.ok_or(NodeError::NoParentSchedule(input.target))?;
    if parent_final.subframe != input.target {
        return Err(NodeError::NoParentSchedule(input.target));
    }
    compute_final(input, Some(parent_final.allocation(input.node)), false)
}

fn build_final_problem(
    input: &FinalScheduleInput<'_>,
    parent: Option<Option<&LinkAllocation>>,
) -> ScheduleProblem {
    let t = input.topology;
    let rate = t.rate_per_slot();
    let links: Vec<LinkEntry> = input
        .children
        .iter()
        .map(|c| {
            let cap = c.n_hat.unwrap_or(0).min(input.n_d);
            // A child without a usable cap is left idle this subframe.
            let queued = if cap == 0 {
                0
            } else {
                (c.queue_down + c.queue_up).saturating_mul(rate)
            };
            LinkEntry::queued(c.demand.total(), queued, t.alpha(c.child), cap)
        })
        .collect();
    let m = links.len();
    let mut interference = vec![vec![false; m]; m];
    for a in 0..m {
        for b in 0..m {
            interference[a][b] =
                a != b && t.interferes(input.children[a].child, input.children[b].child);
        }
    }
    let radios = input.n_d * t.radio_chains(input.node);
    let (radio_budget, reservation) = match parent {
        None => (radios, None),
        Some(alloc) => {
            let reserved = alloc.map(|a| a.n_total).unwrap_or(0);
            let interferes = input
                .children
                .iter()
                .map(|c| t.interferes(input.node, c.child))
                .collect();
            (
                radios.saturating_sub(reserved),
                Some(ParentReservation {
                    alpha: t.alpha(input.node),
                    reserved,
                    interferes,
                }),
            )
        }
    };
    ScheduleProblem {
        links,
        aggregate: None,
        interference,
        n_d: input.n_d,
        rate,
        radio_budget,
        parent: reservation,
    }
}

fn compute_final(
    input: &FinalScheduleInput<'_>,
    parent: Option<Option<&LinkAllocation>>,
    enhancement: bool,
) -> Result<FinalOutcome, NodeError> {
    let t = input.topology;
    if t.is_leaf(input.node) {
        return Err(NodeError::NoChildren(input.node));
    }
    let mut problem = build_final_problem(input, parent);
    let mut deferred = 0;
    // Links the parent reservation leaves no room for cannot take a single slot.
    if let Some(room) = problem.parent_room() {
        for j in 0..problem.links.len() {
            let e = &problem.links[j];
            if e.is_active() && problem.parent_limited(j) && room < i64::from(e.alpha) {
                problem.links[j].queue = Some(0);
                deferred += 1;
            }
        }
    }
    let base = loop {
        match solve_max_scale(&problem) {
            Ok(sol) => break sol,
            Err(SolverError::Infeasible) => {
                // Defer the active link with the smallest backlog (highest id on ties).
                let victim = problem
                    .links
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.is_active())
                    .min_by(|(ia, a), (ib, b)| {
                        a.effective_demand()
                            .cmp(&b.effective_demand())
                            .then(ib.cmp(ia))
                    })
                    .map(|(i, _)| i)
                    .ok_or(SolverError::Infeasible)?;
                problem.links[victim].queue = Some(0);
                deferred += 1;
            }
            Err(e) => return Err(e.into()),
        }
    };
    let solved = if enhancement {
        solve_max_slots(&problem, base.scale)?
    } else {
        base.clone()
    };

    let requests: Vec<PlacementRequest> = input
        .children
        .iter()
        .zip(&solved.slot_counts)
        .map(|(c, &n)| PlacementRequest {
            link: c.child,
            alpha: t.alpha(c.child),
            n,
        })
        .collect();
    let parent_alloc = parent.flatten();
    let placement = place_slots_with_repair(&requests, t, input.node, parent_alloc, input.n_d);

    let mut links = Vec::with_capacity(placement.windows.len());
    for &(link, start, n) in &placement.windows {
        let c = input
            .children
            .iter()
            .find(|c| c.child == link)
            .expect("placed link is a child");
        let (down, up) = split_directions(n, c.queue_down, c.queue_up)?;
        links.push(LinkAllocation::new(link, t.alpha(link), down, up, start));
    }
    let caps = input
        .children
        .iter()
        .map(|c| (c.child, c.n_hat.unwrap_or(0)))
        .collect();
    Ok(FinalOutcome {
        schedule: FinalSchedule {
            node: input.node,
            subframe: input.target,
            links,
        },
        scale: base.scale,
        base_slots: base.objective_slots,
        solved_slots: solved.objective_slots,
        repairs: placement.repairs,
        deferred,
        caps,
    })
}
