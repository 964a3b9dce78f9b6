use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::topology::{NodeId, TreeTopology};

/// Packet queues held by one BS.
///
/// Downlink queues are keyed by destination, uplink queues by source. The
/// per-child downlink totals are cached on every update; [`Self::aggregates_consistent`]
/// recomputes them from the raw maps.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueState {
    downlink: BTreeMap<NodeId, u64>,
    uplink: BTreeMap<NodeId, u64>,
    downlink_via: BTreeMap<NodeId, u64>,
}

impl QueueState {
    pub fn downlink(&self) -> &BTreeMap<NodeId, u64> {
        &self.downlink
    }

    pub fn uplink(&self) -> &BTreeMap<NodeId, u64> {
        &self.uplink
    }

    /// `via` is the child link the packets will leave on.
    pub fn push_downlink(&mut self, dest: NodeId, via: NodeId, count: u64) {
        if count == 0 {
            return;
        }
        *self.downlink.entry(dest).or_default() += count;
        *self.downlink_via.entry(via).or_default() += count;
    }

    pub fn push_uplink(&mut self, source: NodeId, count: u64) {
        if count == 0 {
            return;
        }
        *self.uplink.entry(source).or_default() += count;
    }

    pub fn pop_downlink(&mut self, dest: NodeId, via: NodeId, count: u64) {
        if count == 0 {
            return;
        }
        take(&mut self.downlink, dest, count);
        take(&mut self.downlink_via, via, count);
    }

    pub fn pop_uplink(&mut self, source: NodeId, count: u64) {
        if count == 0 {
            return;
        }
        take(&mut self.uplink, source, count);
    }

    /// Downlink packets waiting for the link to `child`.
    pub fn downlink_for(&self, child: NodeId) -> u64 {
        self.downlink_via.get(&child).copied().unwrap_or(0)
    }

    /// Uplink packets waiting for this BS's parent link.
    pub fn uplink_total(&self) -> u64 {
        self.uplink.values().sum()
    }

    pub fn downlink_total(&self) -> u64 {
        self.downlink.values().sum()
    }

    pub fn total(&self) -> u64 {
        self.uplink_total() + self.downlink_total()
    }

    /// Downlink queues whose packets leave on the link to `child`.
    pub fn downlink_queues_via(
        &self,
        topology: &TreeTopology,
        owner: NodeId,
        child: NodeId,
    ) -> BTreeMap<NodeId, u64> {
        self.downlink
            .iter()
            .filter(|(&dest, &c)| c > 0 && topology.next_hop(owner, dest) == Some(child))
            .map(|(&d, &c)| (d, c))
            .collect()
    }

    /// Recomputes the per-child downlink totals from the per-destination
    /// queues and compares them with the cached values.
    pub fn aggregates_consistent(&self, topology: &TreeTopology, owner: NodeId) -> bool {
        topology.children(owner).iter().all(|&child| {
            let raw: u64 = topology
                .subtree(child)
                .iter()
                .map(|k| self.downlink.get(k).copied().unwrap_or(0))
                .sum();
            raw == self.downlink_for(child)
        }) && self
            .downlink
            .iter()
            .all(|(&dest, &c)| c == 0 || topology.next_hop(owner, dest).is_some())
    }
}

fn take(map: &mut BTreeMap<NodeId, u64>, key: NodeId, count: u64) {
    let slot = map.get_mut(&key).expect("dequeue from a missing queue");
    assert!(
        *slot >= count,
        "dequeue of {count} from a queue of {}",
        *slot
    );
    *slot -= count;
    if *slot == 0 {
        map.remove(&key);
    }
}
