//! Brute-force estimate of the largest uniform per-BS demand a topology can
//! carry.
//!
//! With every small cell offering λ bits per subframe, link `j` carries
//! `subtree_size(j)·λ`. Each BS must fit its attached links (parent link and
//! child links) into the data slots under the pairwise interference, per-link
//! and radio constraints. Those constraints are closed under lowering slot
//! counts, so the minimal per-link vectors of all BSs are jointly feasible
//! exactly when each BS is feasible alone, and the network capacity is the
//! minimum over BSs of the per-BS optimum, found here by exhaustive
//! enumeration.

use serde::Serialize;

use crate::optimizer::{oracle_enumerate, LinkEntry, Scale, ScheduleProblem, SolverError};
use crate::topology::{NodeId, TreeTopology};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// Largest uniform per-BS demand, bits per subframe.
    pub per_bs_bits: f64,
    /// BS whose attached links bind first.
    pub bottleneck: NodeId,
    /// Per-BS limit in bits per subframe, by node id.
    pub per_node_bits: Vec<f64>,
}

impl CapacityEstimate {
    pub fn per_bs_gbps(&self, subframe_duration_s: f64) -> f64 {
        self.per_bs_bits / subframe_duration_s / 1e9
    }
}

/// Scheduling problem over the links attached to `node` with link demands
/// proportional to subtree sizes and normalised so that a scale of 1 means
/// `n_d·r` bits per subframe per BS.
pub fn attached_link_problem(topology: &TreeTopology, node: NodeId, n_d: u32) -> ScheduleProblem {
    let unit = u64::from(n_d) * topology.rate_per_slot();
    let links: Vec<NodeId> = topology.attached_links(node);
    let entries = links
        .iter()
        .map(|&l| {
            LinkEntry::local(
                topology.subtree_size(l) as u64 * unit,
                topology.alpha(l),
                n_d,
            )
        })
        .collect();
    let interference = links
        .iter()
        .map(|&a| {
            links
                .iter()
                .map(|&b| a != b && topology.interferes(a, b))
                .collect()
        })
        .collect();
    ScheduleProblem {
        links: entries,
        aggregate: None,
        interference,
        n_d,
        rate: topology.rate_per_slot(),
        radio_budget: n_d * topology.radio_chains(node),
        parent: None,
    }
}

pub fn capacity_estimate(
    topology: &TreeTopology,
    n_d: u32,
) -> Result<CapacityEstimate, SolverError> {
    let unit = f64::from(n_d) * topology.rate_per_slot() as f64;
    let mut per_node_bits = Vec::with_capacity(topology.len());
    let mut best: Option<(Scale, NodeId)> = None;
    for node in topology.nodes() {
        let problem = attached_link_problem(topology, node, n_d);
        let scale = oracle_enumerate(&problem)?.scale;
        per_node_bits.push(scale.as_f64() * unit);
        if best.is_none_or(|(s, _)| scale < s) {
            best = Some((scale, node));
        }
    }
    let (scale, bottleneck) = best.expect("topology has nodes");
    Ok(CapacityEstimate {
        per_bs_bits: scale.as_f64() * unit,
        bottleneck,
        per_node_bits,
    })
}
