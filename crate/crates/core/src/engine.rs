//! Subframe-by-subframe simulation: two control slots for the scheduling
//! handshake, then the data slots.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{BsMetrics, MetricsRecord};
use crate::node::{
    apportion, check_schedule, compute_final_schedule_macro, compute_final_schedule_nonleaf,
    compute_local_schedule, BaseStation, ChildReport, FinalOutcome, FinalSchedule,
    FinalScheduleInput, LinkAllocation, LocalScheduleReport, NodeError, ReceivedSchedule,
    ReportingFilter,
};
use crate::topology::{NodeId, TreeTopology};
use crate::traffic::{ArrivalGenerator, ArrivalModel, DemandProfile};

pub const CONTROL_SLOTS: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("node {node} at subframe {subframe}: {source}")]
    Node {
        node: NodeId,
        subframe: u64,
        source: NodeError,
    },
    #[error("control slot overflow at parent {parent}: {reason}")]
    ControlOverflow { parent: NodeId, reason: String },
    #[error("runtime assertion failed at subframe {subframe}: {reason}")]
    Assertion { subframe: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubframeClock {
    /// Index of the last subframe run; 0 before the first.
    pub subframe: u64,
    pub slots_per_subframe: u32,
    pub subframe_duration: f64,
}

impl SubframeClock {
    pub fn new(slots_per_subframe: u32, subframe_duration: f64) -> Result<Self, EngineError> {
        if slots_per_subframe <= CONTROL_SLOTS {
            return Err(EngineError::InvalidConfig(format!(
                "slots_per_subframe must exceed {CONTROL_SLOTS}, got {slots_per_subframe}"
            )));
        }
        if !(subframe_duration > 0.0) {
            return Err(EngineError::InvalidConfig(
                "subframe_duration must be positive".into(),
            ));
        }
        Ok(Self {
            subframe: 0,
            slots_per_subframe,
            subframe_duration,
        })
    }

    pub fn data_slots(&self) -> u32 {
        self.slots_per_subframe - CONTROL_SLOTS
    }

    pub fn slot_duration(&self) -> f64 {
        self.subframe_duration / f64::from(self.slots_per_subframe)
    }
}

/// Sub-slot of every child in its parent's control slots, by child id order.
pub fn assign_sub_slots(
    topology: &TreeTopology,
    n_sub: u32,
) -> Result<BTreeMap<(NodeId, NodeId), u32>, EngineError> {
    let mut out = BTreeMap::new();
    for parent in topology.nodes() {
        let kids = topology.children(parent);
        if kids.len() > n_sub as usize {
            return Err(EngineError::InvalidConfig(format!(
                "node {parent} has {} children but a control slot has {n_sub} sub-slots",
                kids.len()
            )));
        }
        let mut sorted = kids.to_vec();
        sorted.sort();
        for (i, c) in sorted.into_iter().enumerate() {
            out.insert((parent, c), i as u32);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetError {
    /// Leaves never compute final schedules.
    Leaf,
    NotYetScheduling {
        start: u64,
    },
}

/// Subframes whose final schedule a BS of height `h` computes during
/// subframe `s`, in a tree of depth `depth`.
pub fn target_subframe(h: u32, s: u64, depth: u32) -> Result<Vec<u64>, TargetError> {
    if h < 2 {
        return Err(TargetError::Leaf);
    }
    let (h, depth) = (u64::from(h), u64::from(depth));
    let start = depth - h + 1;
    if s < start {
        Err(TargetError::NotYetScheduling { start })
    } else if s == start {
        Ok((start..=depth).collect())
    } else {
        Ok(vec![s + h - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    ChildReport(ChildReport),
    /// Final schedules of the sender, one per target subframe computed.
    ParentSchedules(Vec<FinalSchedule>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlMessage {
    pub from: NodeId,
    pub to: NodeId,
    pub subframe: u64,
    pub sub_slot: u32,
    pub payload: Payload,
}

/// Messages sent within one control slot, delivered when the slot ends.
#[derive(Debug, Default)]
struct ControlBus {
    messages: Vec<ControlMessage>,
}

impl ControlBus {
    fn send(&mut self, msg: ControlMessage, n_sub: u32) -> Result<(), EngineError> {
        let parent = match msg.payload {
            Payload::ChildReport(_) => msg.to,
            Payload::ParentSchedules(_) => msg.from,
        };
        if msg.sub_slot >= n_sub {
            return Err(EngineError::ControlOverflow {
                parent,
                reason: format!("sub-slot {} out of {n_sub}", msg.sub_slot),
            });
        }
        let clash = self.messages.iter().any(|m| {
            let p = match m.payload {
                Payload::ChildReport(_) => m.to,
                Payload::ParentSchedules(_) => m.from,
            };
            p == parent && m.sub_slot == msg.sub_slot
        });
        if clash {
            return Err(EngineError::ControlOverflow {
                parent,
                reason: format!("sub-slot {} used twice", msg.sub_slot),
            });
        }
        self.messages.push(msg);
        Ok(())
    }

    fn drain(&mut self) -> Vec<ControlMessage> {
        std::mem::take(&mut self.messages)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub slots_per_subframe: u32,
    pub subframe_duration: f64,
    pub n_sub: u32,
    pub filter_window: usize,
    pub filter_threshold: f64,
    pub enhancement: bool,
    pub arrivals: ArrivalModel,
    /// Keep every computed final schedule for later validation.
    pub record_schedules: bool,
    /// Check every schedule and the queue aggregates as the run goes.
    pub strict: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            slots_per_subframe: 24,
            subframe_duration: 1e-4,
            n_sub: 8,
            filter_window: 10,
            filter_threshold: 0.5,
            enhancement: true,
            arrivals: ArrivalModel::Deterministic,
            record_schedules: false,
            strict: true,
        }
    }
}

/// One final schedule with the inputs needed to re-check it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleLogEntry {
    pub node: NodeId,
    pub computed_at: u64,
    pub target: u64,
    pub parent_allocation: Option<LinkAllocation>,
    pub caps: Vec<(NodeId, u32)>,
    pub schedule: FinalSchedule,
}

/// What the macro-cell BS decided for one target subframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroDecision {
    pub computed_at: u64,
    pub target: u64,
    pub scale: f64,
    /// Slots in the scale-maximising witness.
    pub base_slots: u32,
    /// Slots after the optional slot-maximising pass.
    pub solved_slots: u32,
    pub placed_slots: u32,
}

/// Evidence for the scheduling pipeline, gathered while running.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineAudit {
    /// Targets computed by each non-leaf BS in each subframe.
    pub targets: BTreeMap<NodeId, BTreeMap<u64, Vec<u64>>>,
    /// (node, subframe computed, target, subframe the parent's schedule arrived).
    pub happen_before: Vec<(NodeId, u64, u64, u64)>,
    /// (node, target) pairs skipped because the parent's schedule was missing.
    pub missing_parent: Vec<(NodeId, u64)>,
}

impl PipelineAudit {
    /// Schedules computed without the parent's schedule for the same target
    /// having arrived in an earlier control phase.
    pub fn happen_before_violations(&self) -> usize {
        self.happen_before
            .iter()
            .filter(|&&(_, at, _, received)| received >= at)
            .count()
            + self.missing_parent.len()
    }

    /// Subframe from which every non-leaf BS computes exactly one target per
    /// subframe, `s + h - 1`. `None` if that never holds up to `last`.
    pub fn stable_phase_start(&self, topology: &TreeTopology, last: u64) -> Option<u64> {
        let stable_at = |s: u64| {
            topology.nodes().filter(|&n| !topology.is_leaf(n)).all(|n| {
                let h = u64::from(topology.height(n));
                self.targets
                    .get(&n)
                    .and_then(|m| m.get(&s))
                    .is_some_and(|t| t.as_slice() == [s + h - 1])
            })
        };
        let mut start = None;
        for s in (1..=last).rev() {
            if stable_at(s) {
                start = Some(s);
            } else {
                break;
            }
        }
        start
    }

    /// Parent/child pairs of non-leaf BSs whose targets disagree: in the
    /// stable phase a child's target at `s` must be its parent's target at
    /// `s - (h_parent - h_child)`, which is `s - 1` for adjacent heights.
    pub fn consistency_violations(&self, topology: &TreeTopology, from: u64) -> Vec<(NodeId, u64)> {
        let mut out = Vec::new();
        for child in topology.small_cells().filter(|&n| !topology.is_leaf(n)) {
            let parent = topology.parent(child).expect("small cell has a parent");
            let lag = u64::from(topology.height(parent) - topology.height(child));
            let Some(own) = self.targets.get(&child) else {
                continue;
            };
            for (&s, targets) in own.range(from..) {
                if s < from + lag {
                    continue;
                }
                let theirs = self.targets.get(&parent).and_then(|m| m.get(&(s - lag)));
                if theirs != Some(targets) {
                    out.push((child, s));
                }
            }
        }
        out
    }
}

pub struct Engine {
    topology: TreeTopology,
    config: EngineConfig,
    clock: SubframeClock,
    sub_slots: BTreeMap<(NodeId, NodeId), u32>,
    stations: Vec<BaseStation>,
    profile: DemandProfile,
    arrivals: ArrivalGenerator,
    audit: PipelineAudit,
    macro_decisions: Vec<MacroDecision>,
    schedule_log: Vec<ScheduleLogEntry>,
    generated_bits: u64,
    delivered_bits: u64,
}

struct Move {
    from: NodeId,
    to: NodeId,
    key: NodeId,
    count: u64,
    downlink: bool,
}

impl Engine {
    pub fn new(
        topology: TreeTopology,
        profile: DemandProfile,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let clock = SubframeClock::new(config.slots_per_subframe, config.subframe_duration)?;
        if config.filter_window == 0 {
            return Err(EngineError::InvalidConfig(
                "filter_window must be at least 1".into(),
            ));
        }
        if !(config.filter_threshold >= 0.0) {
            return Err(EngineError::InvalidConfig(
                "filter_threshold must be non-negative".into(),
            ));
        }
        let sub_slots = assign_sub_slots(&topology, config.n_sub)?;
        let stations = topology
            .nodes()
            .map(|n| {
                BaseStation::new(
                    n,
                    ReportingFilter::new(config.filter_window, config.filter_threshold),
                )
            })
            .collect();
        let arrivals = ArrivalGenerator::new(config.arrivals, topology.rate_per_slot());
        Ok(Self {
            topology,
            config,
            clock,
            sub_slots,
            stations,
            profile,
            arrivals,
            audit: PipelineAudit::default(),
            macro_decisions: Vec::new(),
            schedule_log: Vec::new(),
            generated_bits: 0,
            delivered_bits: 0,
        })
    }

    pub fn topology(&self) -> &TreeTopology {
        &self.topology
    }

    pub fn clock(&self) -> &SubframeClock {
        &self.clock
    }

    pub fn station(&self, node: NodeId) -> &BaseStation {
        &self.stations[node.index()]
    }

    pub fn audit(&self) -> &PipelineAudit {
        &self.audit
    }

    pub fn macro_decisions(&self) -> &[MacroDecision] {
        &self.macro_decisions
    }

    pub fn schedule_log(&self) -> &[ScheduleLogEntry] {
        &self.schedule_log
    }

    pub fn generated_bits(&self) -> u64 {
        self.generated_bits
    }

    pub fn delivered_bits(&self) -> u64 {
        self.delivered_bits
    }

    pub fn queued_packets(&self) -> u64 {
        self.stations.iter().map(|s| s.queues.total()).sum()
    }

    fn n_d(&self) -> u32 {
        self.clock.data_slots()
    }

    fn node_err(&self, node: NodeId, source: NodeError) -> EngineError {
        EngineError::Node {
            node,
            subframe: self.clock.subframe + 1,
            source,
        }
    }

    /// Runs the next subframe and returns its measurements.
    pub fn run_subframe(&mut self) -> Result<MetricsRecord, EngineError> {
        let s = self.clock.subframe + 1;
        self.control_slot_reports(s)?;
        let repairs = self.control_slot_schedules(s)?;
        let (dl, ul) = self.data_phase(s);
        self.enqueue_arrivals(s);
        if self.config.strict {
            for st in &self.stations {
                if !st.queues.aggregates_consistent(&self.topology, st.id) {
                    return Err(EngineError::Assertion {
                        subframe: s,
                        reason: format!("queue aggregates at node {} disagree", st.id),
                    });
                }
            }
        }
        let r = self.topology.rate_per_slot();
        let per_bs = self
            .topology
            .small_cells()
            .map(|n| {
                let st = &self.stations[n.index()];
                BsMetrics {
                    node: n,
                    dl_bits: dl.get(&n).copied().unwrap_or(0) * r,
                    ul_bits: ul.get(&n).copied().unwrap_or(0) * r,
                    queued_packets: st.queues.total(),
                    reported_n_hat: st.reported_n_hat,
                }
            })
            .collect();
        let macro_slots = self.stations[0]
            .own_schedules
            .get(&s)
            .map(FinalSchedule::total_slots)
            .unwrap_or(0);
        for st in &mut self.stations {
            st.forget_before(s + 1);
        }
        self.clock.subframe = s;
        Ok(MetricsRecord {
            subframe: s,
            per_bs,
            macro_queued_packets: self.stations[0].queues.total(),
            placement_repairs: repairs,
            macro_slots,
        })
    }

    /// Runs `count` subframes.
    pub fn run(&mut self, count: u64) -> Result<Vec<MetricsRecord>, EngineError> {
        (0..count).map(|_| self.run_subframe()).collect()
    }

    /// First control slot: every small cell refreshes its local schedule and
    /// reports to its parent.
    fn control_slot_reports(&mut self, s: u64) -> Result<(), EngineError> {
        let n_d = self.n_d();
        let depth = self.topology.depth();
        let mut bus = ControlBus::default();
        for node in self.topology.small_cells().collect::<Vec<_>>() {
            let own = self.profile.rate_at(node, s);
            let st = &self.stations[node.index()];
            let local = compute_local_schedule(&self.topology, node, own, &st.child_demands(), n_d)
                .map_err(|e| self.node_err(node, e))?;
            let st = &mut self.stations[node.index()];
            // Reports are still filling in from below until the pipeline is
            // stable, so those values bypass the filter.
            let reported = if s < u64::from(depth) {
                local.n_hat
            } else {
                st.filter.update(local.n_hat)
            }
            .min(n_d);
            st.reported_n_hat = reported;
            let report = ChildReport {
                uplink_queue: st.queues.uplink_total(),
                demand: st.subtree_demand(own),
                local: LocalScheduleReport { n_hat: reported },
            };
            let parent = self.topology.parent(node).expect("small cell has a parent");
            bus.send(
                ControlMessage {
                    from: node,
                    to: parent,
                    subframe: s,
                    sub_slot: self.sub_slots[&(parent, node)],
                    payload: Payload::ChildReport(report),
                },
                self.config.n_sub,
            )?;
        }
        for msg in bus.drain() {
            if let Payload::ChildReport(r) = msg.payload {
                self.stations[msg.to.index()]
                    .child_reports
                    .insert(msg.from, r);
            }
        }
        Ok(())
    }

    /// Second control slot: every non-leaf BS computes the final schedules
    /// it is due and sends them to its children. Returns placement repairs.
    fn control_slot_schedules(&mut self, s: u64) -> Result<u32, EngineError> {
        let n_d = self.n_d();
        let depth = self.topology.depth();
        let mut bus = ControlBus::default();
        let mut repairs = 0;
        let schedulers: Vec<NodeId> = self
            .topology
            .nodes()
            .filter(|&n| !self.topology.is_leaf(n))
            .collect();
        for node in schedulers {
            let Ok(targets) = target_subframe(self.topology.height(node), s, depth) else {
                continue;
            };
            self.audit
                .targets
                .entry(node)
                .or_default()
                .insert(s, targets.clone());
            let mut computed = Vec::new();
            for t in targets {
                let st = &self.stations[node.index()];
                let inputs = st.child_inputs(&self.topology);
                let input = FinalScheduleInput {
                    topology: &self.topology,
                    node,
                    target: t,
                    n_d,
                    children: &inputs,
                };
                let (outcome, parent_alloc): (FinalOutcome, Option<LinkAllocation>) =
                    if node.is_macro() {
                        let out = compute_final_schedule_macro(&input, self.config.enhancement)
                            .map_err(|e| self.node_err(node, e))?;
                        self.macro_decisions.push(MacroDecision {
                            computed_at: s,
                            target: t,
                            scale: out.scale.as_f64(),
                            base_slots: out.base_slots,
                            solved_slots: out.solved_slots,
                            placed_slots: out.schedule.total_slots(),
                        });
                        (out, None)
                    } else {
                        let Some(received) = st.parent_schedules.get(&t) else {
                            self.audit.missing_parent.push((node, t));
                            continue;
                        };
                        self.audit
                            .happen_before
                            .push((node, s, t, received.received_at));
                        let out = compute_final_schedule_nonleaf(&input, Some(&received.schedule))
                            .map_err(|e| self.node_err(node, e))?;
                        (out, received.schedule.allocation(node).cloned())
                    };
                if self.config.strict {
                    let v = check_schedule(
                        &self.topology,
                        &outcome.schedule,
                        parent_alloc.as_ref(),
                        &outcome.caps,
                        n_d,
                    );
                    if let Some(first) = v.first() {
                        return Err(EngineError::Assertion {
                            subframe: s,
                            reason: format!("schedule of node {node} for subframe {t}: {first}"),
                        });
                    }
                }
                repairs += outcome.repairs;
                if self.config.record_schedules {
                    self.schedule_log.push(ScheduleLogEntry {
                        node,
                        computed_at: s,
                        target: t,
                        parent_allocation: parent_alloc,
                        caps: outcome.caps.clone(),
                        schedule: outcome.schedule.clone(),
                    });
                }
                self.stations[node.index()]
                    .own_schedules
                    .insert(t, outcome.schedule.clone());
                computed.push(outcome.schedule);
            }
            if computed.is_empty() {
                continue;
            }
            for &child in self.topology.children(node) {
                bus.send(
                    ControlMessage {
                        from: node,
                        to: child,
                        subframe: s,
                        sub_slot: self.sub_slots[&(node, child)],
                        payload: Payload::ParentSchedules(computed.clone()),
                    },
                    self.config.n_sub,
                )?;
            }
        }
        for msg in bus.drain() {
            if let Payload::ParentSchedules(list) = msg.payload {
                let st = &mut self.stations[msg.to.index()];
                for schedule in list {
                    st.parent_schedules.insert(
                        schedule.subframe,
                        ReceivedSchedule {
                            schedule,
                            received_at: s,
                        },
                    );
                }
            }
        }
        Ok(repairs)
    }

    /// Data slots: every link executes the final schedule for `s`. Packets
    /// move one hop. Returns packets delivered per BS (downlink, uplink).
    fn data_phase(&mut self, s: u64) -> (BTreeMap<NodeId, u64>, BTreeMap<NodeId, u64>) {
        let t = &self.topology;
        let mut moves = Vec::new();
        for st in &self.stations {
            let Some(schedule) = st.own_schedules.get(&s) else {
                continue;
            };
            for alloc in &schedule.links {
                let child = alloc.link;
                let dl_queues = st.queues.downlink_queues_via(t, st.id, child);
                for (dest, count) in apportion(u64::from(alloc.n_down), &dl_queues) {
                    moves.push(Move {
                        from: st.id,
                        to: child,
                        key: dest,
                        count,
                        downlink: true,
                    });
                }
                let ul_queues = self.stations[child.index()].queues.uplink();
                for (source, count) in apportion(u64::from(alloc.n_up), ul_queues) {
                    moves.push(Move {
                        from: child,
                        to: st.id,
                        key: source,
                        count,
                        downlink: false,
                    });
                }
            }
        }
        for m in &moves {
            let q = &mut self.stations[m.from.index()].queues;
            if m.downlink {
                q.pop_downlink(m.key, m.to, m.count);
            } else {
                q.pop_uplink(m.key, m.count);
            }
        }
        let mut dl = BTreeMap::new();
        let mut ul = BTreeMap::new();
        for m in moves {
            if m.downlink {
                if m.to == m.key {
                    *dl.entry(m.key).or_default() += m.count;
                } else {
                    let via = t.next_hop(m.to, m.key).expect("destination below receiver");
                    self.stations[m.to.index()]
                        .queues
                        .push_downlink(m.key, via, m.count);
                }
            } else if m.to.is_macro() {
                *ul.entry(m.key).or_default() += m.count;
            } else {
                self.stations[m.to.index()]
                    .queues
                    .push_uplink(m.key, m.count);
            }
        }
        let r = t.rate_per_slot();
        self.delivered_bits += (dl.values().sum::<u64>() + ul.values().sum::<u64>()) * r;
        (dl, ul)
    }

    fn enqueue_arrivals(&mut self, s: u64) {
        let r = self.topology.rate_per_slot();
        for node in self.topology.small_cells().collect::<Vec<_>>() {
            let a = self.arrivals.arrivals_for(&self.profile, node, s);
            let via = self
                .topology
                .next_hop(NodeId::MACRO, node)
                .expect("route from macro");
            self.stations[0].queues.push_downlink(node, via, a.downlink);
            self.stations[node.index()]
                .queues
                .push_uplink(node, a.uplink);
            self.generated_bits += (a.downlink + a.uplink) * r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NodeSpec;

    fn chain(len: usize) -> TreeTopology {
        let nodes: Vec<NodeSpec> = (0..len)
            .map(|i| NodeSpec {
                parent: i.checked_sub(1).map(NodeId),
                alpha: 1,
                radio_chains: 2,
            })
            .collect();
        TreeTopology::new(&nodes, &[], 55_417).unwrap()
    }

    #[test]
    fn targets_follow_height() {
        assert_eq!(target_subframe(4, 1, 4), Ok(vec![1, 2, 3, 4]));
        assert_eq!(target_subframe(3, 2, 4), Ok(vec![2, 3, 4]));
        assert_eq!(target_subframe(3, 3, 4), Ok(vec![5]));
        assert_eq!(
            target_subframe(3, 1, 4),
            Err(TargetError::NotYetScheduling { start: 2 })
        );
        assert_eq!(target_subframe(1, 9, 4), Err(TargetError::Leaf));
    }

    #[test]
    fn sub_slots_by_child_id() {
        let spec = |parent: Option<usize>| NodeSpec {
            parent: parent.map(NodeId),
            alpha: 1,
            radio_chains: 1,
        };
        let mut nodes = vec![spec(None); 10];
        for i in [3, 5, 9] {
            nodes[i] = spec(Some(0));
        }
        for i in [1, 2, 4, 6, 7, 8] {
            nodes[i] = spec(Some(3));
        }
        let t = TreeTopology::new(&nodes, &[], 1).unwrap();
        let slots = assign_sub_slots(&t, 8).unwrap();
        assert_eq!(slots[&(NodeId(0), NodeId(3))], 0);
        assert_eq!(slots[&(NodeId(0), NodeId(5))], 1);
        assert_eq!(slots[&(NodeId(0), NodeId(9))], 2);
        assert_eq!(slots[&(NodeId(3), NodeId(1))], 0);
        assert!(matches!(
            assign_sub_slots(&t, 5),
            Err(EngineError::InvalidConfig(_))
        ));
    }

    #[test]
    fn idle_network_moves_nothing() {
        let t = chain(2);
        let profile = DemandProfile::uniform(&t, 0, 0);
        let mut e = Engine::new(t, profile, EngineConfig::default()).unwrap();
        for rec in e.run(20).unwrap() {
            assert_eq!(rec.aggregate_bits(), 0);
            assert_eq!(rec.macro_slots, 0);
        }
    }

    #[test]
    fn chain_of_three_pipeline() {
        let t = chain(3);
        let profile = DemandProfile::uniform(&t, 60_000, 30_000);
        let mut e = Engine::new(t, profile, EngineConfig::default()).unwrap();
        e.run(30).unwrap();
        let a = e.audit();
        assert_eq!(a.targets[&NodeId(0)][&1], vec![1, 2, 3]);
        assert_eq!(a.targets[&NodeId(1)][&2], vec![2, 3]);
        assert!(!a.targets.contains_key(&NodeId(2)));
        assert_eq!(a.stable_phase_start(e.topology(), 30), Some(3));
        assert_eq!(a.happen_before_violations(), 0);
        assert!(a.consistency_violations(e.topology(), 3).is_empty());
    }

    #[test]
    fn light_load_is_delivered() {
        let t = chain(3);
        let profile = DemandProfile::uniform(&t, 60_000, 30_000);
        let mut e = Engine::new(t, profile, EngineConfig::default()).unwrap();
        let recs = e.run(200).unwrap();
        assert!(e.delivered_bits() <= e.generated_bits());
        // Backlog stays bounded: a few subframes of pipeline worth of packets.
        assert!(e.queued_packets() < 40, "queued {}", e.queued_packets());
        let tail: u64 = recs[100..].iter().map(MetricsRecord::aggregate_bits).sum();
        let offered = 100 * 2 * 90_000;
        assert!((tail as f64 - offered as f64).abs() / (offered as f64) < 0.05);
    }
}
