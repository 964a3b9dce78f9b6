//! Per-BS demand profiles and packet arrivals.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::node::DemandReport;
use crate::topology::{NodeId, TreeTopology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("segments for node {0} must start at strictly increasing subframes")]
    Unsorted(NodeId),
    #[error("node {0} is not a small-cell BS")]
    NotSmallCell(NodeId),
}

/// Converts a rate in Gbps into bits per subframe.
pub fn bits_per_subframe(gbps: f64, subframe_duration_s: f64) -> u64 {
    (gbps * 1e9 * subframe_duration_s).round() as u64
}

/// Rates from `start` onward, bits per subframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: u64,
    pub downlink: u64,
    pub uplink: u64,
}

/// Piecewise-constant demand of every small-cell BS. Before a node's first
/// segment, and for nodes without segments, the demand is zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandProfile {
    segments: BTreeMap<NodeId, Vec<Segment>>,
}

impl DemandProfile {
    /// Same constant rates at every small-cell BS from subframe 1.
    pub fn uniform(topology: &TreeTopology, downlink: u64, uplink: u64) -> Self {
        let segments = topology
            .small_cells()
            .map(|n| {
                (
                    n,
                    vec![Segment {
                        start: 1,
                        downlink,
                        uplink,
                    }],
                )
            })
            .collect();
        Self { segments }
    }

    pub fn set(&mut self, node: NodeId, segments: Vec<Segment>) -> Result<(), TrafficError> {
        if node.is_macro() {
            return Err(TrafficError::NotSmallCell(node));
        }
        if segments.windows(2).any(|w| w[0].start >= w[1].start) {
            return Err(TrafficError::Unsorted(node));
        }
        self.segments.insert(node, segments);
        Ok(())
    }

    pub fn segments(&self, node: NodeId) -> &[Segment] {
        self.segments.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.segments.keys().copied()
    }

    pub fn rate_at(&self, node: NodeId, subframe: u64) -> DemandReport {
        self.segments(node)
            .iter()
            .rev()
            .find(|s| s.start <= subframe)
            .map(|s| DemandReport {
                downlink: s.downlink,
                uplink: s.uplink,
            })
            .unwrap_or_default()
    }
}

/// Step schedule of the dynamic-demand experiment: every small cell at
/// `downlink`/`uplink`; the target doubles its downlink at 250 and uplink at
/// 400, then reverts them at 600 and 750.
pub fn dynamic_step_profile(
    topology: &TreeTopology,
    target: NodeId,
    downlink: u64,
    uplink: u64,
) -> Result<DemandProfile, TrafficError> {
    let mut profile = DemandProfile::uniform(topology, downlink, uplink);
    let seg = |start, downlink, uplink| Segment {
        start,
        downlink,
        uplink,
    };
    profile.set(
        target,
        vec![
            seg(1, downlink, uplink),
            seg(250, 2 * downlink, uplink),
            seg(400, 2 * downlink, 2 * uplink),
            seg(600, downlink, 2 * uplink),
            seg(750, downlink, uplink),
        ],
    )?;
    Ok(profile)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrivalModel {
    /// Exactly the integrated rate, fractional packets carried forward.
    #[default]
    Deterministic,
    /// Poisson packet counts with the same mean. In a scenario the seed is
    /// mixed with the scenario seed.
    Poisson {
        #[serde(default)]
        seed: u64,
    },
}

/// Packets arriving in one subframe for one small-cell BS.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Arrivals {
    /// Destined to the BS; enters the network at the macro-cell BS.
    pub downlink: u64,
    /// Sourced at the BS.
    pub uplink: u64,
}

/// Turns a [`DemandProfile`] into packet counts, one call per node and
/// subframe in increasing subframe order.
#[derive(Debug, Clone)]
pub struct ArrivalGenerator {
    model: ArrivalModel,
    packet_bits: u64,
    carry: BTreeMap<NodeId, (u64, u64)>,
    rngs: BTreeMap<NodeId, ChaCha8Rng>,
}

impl ArrivalGenerator {
    pub fn new(model: ArrivalModel, packet_bits: u64) -> Self {
        assert!(packet_bits > 0, "packets must carry at least one bit");
        Self {
            model,
            packet_bits,
            carry: BTreeMap::new(),
            rngs: BTreeMap::new(),
        }
    }

    pub fn arrivals_for(
        &mut self,
        profile: &DemandProfile,
        node: NodeId,
        subframe: u64,
    ) -> Arrivals {
        let rate = profile.rate_at(node, subframe);
        match self.model {
            ArrivalModel::Deterministic => {
                let r = self.packet_bits;
                let acc = self.carry.entry(node).or_default();
                acc.0 += rate.downlink;
                acc.1 += rate.uplink;
                let out = Arrivals {
                    downlink: acc.0 / r,
                    uplink: acc.1 / r,
                };
                acc.0 %= r;
                acc.1 %= r;
                out
            }
            ArrivalModel::Poisson { seed } => {
                let r = self.packet_bits as f64;
                let rng = self.rngs.entry(node).or_insert_with(|| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(node.index() as u64);
                    rng
                });
                let mut draw = |bits: u64| {
                    if bits == 0 {
                        0
                    } else {
                        Poisson::new(bits as f64 / r)
                            .expect("positive mean")
                            .sample(rng) as u64
                    }
                };
                Arrivals {
                    downlink: draw(rate.downlink),
                    uplink: draw(rate.uplink),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NodeSpec;

    fn two_nodes() -> TreeTopology {
        let spec = |parent| NodeSpec {
            parent,
            alpha: 1,
            radio_chains: 1,
        };
        TreeTopology::new(&[spec(None), spec(Some(NodeId(0)))], &[], 10).unwrap()
    }

    #[test]
    fn zero_rate_gives_no_packets() {
        let t = two_nodes();
        let p = DemandProfile::uniform(&t, 0, 0);
        let mut g = ArrivalGenerator::new(ArrivalModel::Deterministic, 10);
        for s in 1..50 {
            assert_eq!(g.arrivals_for(&p, NodeId(1), s), Arrivals::default());
        }
    }

    #[test]
    fn fractional_rate_alternates() {
        let t = two_nodes();
        let p = DemandProfile::uniform(&t, 25, 0);
        let mut g = ArrivalGenerator::new(ArrivalModel::Deterministic, 10);
        let counts: Vec<u64> = (1..=6)
            .map(|s| g.arrivals_for(&p, NodeId(1), s).downlink)
            .collect();
        assert_eq!(counts, vec![2, 3, 2, 3, 2, 3]);
    }

    #[test]
    fn steps_apply_on_their_subframe() {
        let t = two_nodes();
        let p = dynamic_step_profile(&t, NodeId(1), 67_000, 33_000).unwrap();
        let at = |s| p.rate_at(NodeId(1), s);
        assert_eq!(
            at(249),
            DemandReport {
                downlink: 67_000,
                uplink: 33_000
            }
        );
        assert_eq!(
            at(250),
            DemandReport {
                downlink: 134_000,
                uplink: 33_000
            }
        );
        assert_eq!(
            at(400),
            DemandReport {
                downlink: 134_000,
                uplink: 66_000
            }
        );
        assert_eq!(
            at(600),
            DemandReport {
                downlink: 67_000,
                uplink: 66_000
            }
        );
        assert_eq!(
            at(750),
            DemandReport {
                downlink: 67_000,
                uplink: 33_000
            }
        );
    }

    #[test]
    fn gbps_conversion() {
        assert_eq!(bits_per_subframe(3.33, 1e-4), 333_000);
        assert_eq!(bits_per_subframe(0.67, 1e-4), 67_000);
    }

    #[test]
    fn unsorted_segments_rejected() {
        let mut p = DemandProfile::default();
        let s = Segment {
            start: 5,
            downlink: 1,
            uplink: 1,
        };
        assert_eq!(
            p.set(NodeId(1), vec![s, s]),
            Err(TrafficError::Unsorted(NodeId(1)))
        );
        assert_eq!(
            p.set(NodeId(0), vec![s]),
            Err(TrafficError::NotSmallCell(NodeId(0)))
        );
    }

    #[test]
    fn poisson_mean_is_close() {
        let t = two_nodes();
        let p = DemandProfile::uniform(&t, 25, 5);
        let mut g = ArrivalGenerator::new(ArrivalModel::Poisson { seed: 3 }, 10);
        let n = 20_000;
        let total: u64 = (1..=n)
            .map(|s| g.arrivals_for(&p, NodeId(1), s).downlink)
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 2.5).abs() < 0.05, "mean {mean}");
    }
}
