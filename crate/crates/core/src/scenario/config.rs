use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineConfig, CONTROL_SLOTS};
use crate::topology::{
    generate_tree, NodeId, NodeSpec, TreeParams, TreeTopology, DEFAULT_LINK_RATE_BPS,
};
use crate::traffic::{
    bits_per_subframe, dynamic_step_profile, ArrivalModel, DemandProfile, Segment,
};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &str, reason: impl fmt::Display) -> Self {
        Self {
            field: field.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Radio-chain scenario of the numerical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// No interfering pairs, a radio chain for every attached link.
    #[serde(rename = "mi-er")]
    MiEr,
    /// Configured interference, two radio chains at the macro-cell BS and
    /// one at every small cell.
    #[serde(rename = "li-lr2")]
    LiLr2,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::MiEr => "mi-er",
            Preset::LiLr2 => "li-lr2",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mi-er" | "mier" => Ok(Preset::MiEr),
            "li-lr2" | "li-lr(2)" | "lilr2" => Ok(Preset::LiLr2),
            other => Err(ConfigError::new(
                "radios",
                format!("unknown preset `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadioSpec {
    Preset(Preset),
    Explicit(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<usize>,
    pub alpha: u8,
    pub radio_chains: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySource {
    /// Random tree seeded by the scenario seed.
    Generate {
        num_nodes: usize,
        max_children: usize,
        interference_pair_fraction: f64,
        multihop_fraction: f64,
    },
    /// Topology text file, relative paths resolved against the config file.
    File { path: PathBuf },
    Inline {
        nodes: Vec<InlineNode>,
        #[serde(default)]
        interference: Vec<(usize, usize)>,
    },
}

impl Default for TopologySource {
    fn default() -> Self {
        TopologySource::Generate {
            num_nodes: 20,
            max_children: 4,
            interference_pair_fraction: 0.1,
            multihop_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub window: usize,
    pub threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            window: 10,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeTraffic {
    pub id: usize,
    /// Bits per subframe.
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Per small cell.
    pub downlink_gbps: f64,
    pub uplink_gbps: f64,
    /// Run the step experiment on this BS.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_target: Option<usize>,
    /// Explicit per-BS profiles; they replace the uniform rates.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeTraffic>,
    pub arrivals: ArrivalModel,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            downlink_gbps: 0.67,
            uplink_gbps: 0.33,
            step_target: None,
            nodes: Vec::new(),
            arrivals: ArrivalModel::Deterministic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub num_subframes: u64,
    pub slots_per_subframe: u32,
    /// Must equal `slots_per_subframe - 2` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_slots: Option<u32>,
    pub subframe_duration_s: f64,
    pub link_rate_bps: f64,
    pub enhancement: bool,
    pub n_sub: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radios: Option<RadioSpec>,
    pub topology: TopologySource,
    pub filter: FilterConfig,
    pub traffic: TrafficConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            num_subframes: 1000,
            slots_per_subframe: 24,
            data_slots: None,
            subframe_duration_s: 1e-4,
            link_rate_bps: DEFAULT_LINK_RATE_BPS,
            enhancement: true,
            n_sub: 8,
            radios: Some(RadioSpec::Preset(Preset::MiEr)),
            topology: TopologySource::default(),
            filter: FilterConfig::default(),
            traffic: TrafficConfig::default(),
        }
    }
}

/// A validated, fully built scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: TreeTopology,
    pub profile: DemandProfile,
    pub engine: EngineConfig,
    pub num_subframes: u64,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("<file>")
                .to_string();
            ConfigError { field, reason: msg }
        })
    }

    /// Reads a config file; a relative topology path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let TopologySource::File { path: p } = &mut cfg.topology {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn data_slots(&self) -> u32 {
        self.slots_per_subframe.saturating_sub(CONTROL_SLOTS)
    }

    /// Bits carried by one data slot.
    pub fn rate_per_slot(&self) -> u64 {
        let slot = self.subframe_duration_s / f64::from(self.slots_per_subframe);
        (self.link_rate_bps * slot).round() as u64
    }

    /// Sets both uniform rates from a per-BS load split 2:1 downlink:uplink.
    pub fn set_load_gbps(&mut self, load: f64) {
        self.traffic.downlink_gbps = load * 2.0 / 3.0;
        self.traffic.uplink_gbps = load / 3.0;
    }

    fn check_scalars(&self) -> Result<(), ConfigError> {
        if self.slots_per_subframe <= CONTROL_SLOTS {
            return Err(ConfigError::new(
                "slots_per_subframe",
                format!("must exceed the {CONTROL_SLOTS} control slots"),
            ));
        }
        if let Some(n_d) = self.data_slots {
            if n_d != self.data_slots() {
                return Err(ConfigError::new(
                    "data_slots",
                    format!(
                        "must equal slots_per_subframe - {CONTROL_SLOTS} = {}",
                        self.data_slots()
                    ),
                ));
            }
        }
        if !(self.subframe_duration_s > 0.0 && self.subframe_duration_s.is_finite()) {
            return Err(ConfigError::new("subframe_duration_s", "must be positive"));
        }
        if !(self.link_rate_bps > 0.0 && self.link_rate_bps.is_finite()) {
            return Err(ConfigError::new("link_rate_bps", "must be positive"));
        }
        if self.rate_per_slot() == 0 {
            return Err(ConfigError::new(
                "link_rate_bps",
                "a data slot must carry at least one bit",
            ));
        }
        if self.n_sub == 0 {
            return Err(ConfigError::new("n_sub", "must be at least 1"));
        }
        if self.filter.window == 0 {
            return Err(ConfigError::new("filter.window", "must be at least 1"));
        }
        if !(self.filter.threshold >= 0.0) {
            return Err(ConfigError::new("filter.threshold", "must be non-negative"));
        }
        for (field, v) in [
            ("traffic.downlink_gbps", self.traffic.downlink_gbps),
            ("traffic.uplink_gbps", self.traffic.uplink_gbps),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::new(field, "must be a non-negative rate"));
            }
        }
        Ok(())
    }

    fn build_topology(&self) -> Result<TreeTopology, ConfigError> {
        let rate = self.rate_per_slot();
        let preset = match &self.radios {
            Some(RadioSpec::Preset(p)) => Some(*p),
            _ => None,
        };
        let base = match &self.topology {
            TopologySource::Generate {
                num_nodes,
                max_children,
                interference_pair_fraction,
                multihop_fraction,
            } => {
                let fraction = if preset == Some(Preset::MiEr) {
                    0.0
                } else {
                    *interference_pair_fraction
                };
                generate_tree(&TreeParams {
                    num_nodes: *num_nodes,
                    max_children: *max_children,
                    interference_pair_fraction: fraction,
                    multihop_fraction: *multihop_fraction,
                    seed: self.seed,
                })
                .map_err(|e| ConfigError::new("topology", e))?
            }
            TopologySource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ConfigError::new("topology.path", format!("{}: {e}", path.display()))
                })?;
                TreeTopology::from_text(&text).map_err(|e| ConfigError::new("topology.path", e))?
            }
            TopologySource::Inline {
                nodes,
                interference,
            } => {
                let specs: Vec<NodeSpec> = nodes
                    .iter()
                    .map(|n| NodeSpec {
                        parent: n.parent.map(NodeId),
                        alpha: n.alpha,
                        radio_chains: n.radio_chains,
                    })
                    .collect();
                let pairs: Vec<_> = interference
                    .iter()
                    .map(|&(a, b)| (NodeId(a), NodeId(b)))
                    .collect();
                TreeTopology::new(&specs, &pairs, rate)
                    .map_err(|e| ConfigError::new("topology.nodes", e))?
            }
        };
        let topo = base
            .with_rate_per_slot(rate)
            .map_err(|e| ConfigError::new("link_rate_bps", e))?;
        let chains = match &self.radios {
            None => return Ok(topo),
            Some(RadioSpec::Preset(Preset::MiEr)) => topo.ample_radio_chains(),
            Some(RadioSpec::Preset(Preset::LiLr2)) => topo
                .nodes()
                .map(|n| if n.is_macro() { 2 } else { 1 })
                .collect(),
            Some(RadioSpec::Explicit(v)) => v.clone(),
        };
        topo.with_radio_chains(chains)
            .map_err(|e| ConfigError::new("radios", e))
    }

    fn build_profile(&self, topology: &TreeTopology) -> Result<DemandProfile, ConfigError> {
        let dl = bits_per_subframe(self.traffic.downlink_gbps, self.subframe_duration_s);
        let ul = bits_per_subframe(self.traffic.uplink_gbps, self.subframe_duration_s);
        let mut profile = match self.traffic.step_target {
            None => DemandProfile::uniform(topology, dl, ul),
            Some(t) => {
                if t == 0 || t >= topology.len() {
                    return Err(ConfigError::new(
                        "traffic.step_target",
                        format!("no small-cell BS {t}"),
                    ));
                }
                dynamic_step_profile(topology, NodeId(t), dl, ul)
                    .map_err(|e| ConfigError::new("traffic.step_target", e))?
            }
        };
        for n in &self.traffic.nodes {
            if n.id == 0 || n.id >= topology.len() {
                return Err(ConfigError::new(
                    "traffic.nodes",
                    format!("no small-cell BS {}", n.id),
                ));
            }
            profile
                .set(NodeId(n.id), n.segments.clone())
                .map_err(|e| ConfigError::new("traffic.nodes", e))?;
        }
        Ok(profile)
    }

    pub fn build(&self) -> Result<Scenario, ConfigError> {
        self.check_scalars()?;
        let topology = self.build_topology()?;
        if self.num_subframes < u64::from(topology.depth()) {
            return Err(ConfigError::new(
                "num_subframes",
                format!("must be at least the tree depth {}", topology.depth()),
            ));
        }
        let max_children = topology
            .nodes()
            .map(|n| topology.children(n).len())
            .max()
            .unwrap_or(0);
        if max_children > self.n_sub as usize {
            return Err(ConfigError::new(
                "n_sub",
                format!(
                    "a BS has {max_children} children but a control slot has {} sub-slots",
                    self.n_sub
                ),
            ));
        }
        let profile = self.build_profile(&topology)?;
        let arrivals = match self.traffic.arrivals {
            ArrivalModel::Poisson { seed } => ArrivalModel::Poisson {
                seed: self.seed ^ seed.rotate_left(32),
            },
            m => m,
        };
        Ok(Scenario {
            topology,
            profile,
            engine: EngineConfig {
                slots_per_subframe: self.slots_per_subframe,
                subframe_duration: self.subframe_duration_s,
                n_sub: self.n_sub,
                filter_window: self.filter.window,
                filter_threshold: self.filter.threshold,
                enhancement: self.enhancement,
                arrivals,
                record_schedules: false,
                strict: true,
            },
            num_subframes: self.num_subframes,
        })
    }

    /// The same scenario with every derived value written out: inline
    /// topology, explicit radio chains and per-BS traffic segments.
    pub fn expanded(&self, scenario: &Scenario) -> ScenarioConfig {
        let t = &scenario.topology;
        let nodes = t
            .node_specs()
            .into_iter()
            .map(|s| InlineNode {
                parent: s.parent.map(NodeId::index),
                alpha: s.alpha,
                radio_chains: s.radio_chains,
            })
            .collect();
        let interference = t
            .interference()
            .pairs()
            .into_iter()
            .map(|(a, b)| (a.index(), b.index()))
            .collect();
        let traffic_nodes = t
            .small_cells()
            .map(|n| NodeTraffic {
                id: n.index(),
                segments: scenario.profile.segments(n).to_vec(),
            })
            .collect();
        ScenarioConfig {
            data_slots: Some(self.data_slots()),
            radios: Some(RadioSpec::Explicit(
                t.nodes().map(|n| t.radio_chains(n)).collect(),
            )),
            topology: TopologySource::Inline {
                nodes,
                interference,
            },
            traffic: TrafficConfig {
                step_target: None,
                nodes: traffic_nodes,
                ..self.traffic.clone()
            },
            ..self.clone()
        }
    }
}
