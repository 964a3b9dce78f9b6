//! Static model of the backhaul tree.
//!
//! Node 0 is always the macro-cell BS. Every other node owns exactly one
//! logical link towards its parent, and that link is identified by the
//! child's id throughout the crate.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default physical link rate used by the numerical scenarios (bits/s).
pub const DEFAULT_LINK_RATE_BPS: f64 = 13.3e9;
/// Default slot duration: a 0.1 ms subframe split into 24 slots.
pub const DEFAULT_SLOT_DURATION_S: f64 = 1e-4 / 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const MACRO: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_macro(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("malformed topology: {0}")]
    Malformed(String),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Parent link of a small-cell BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalLink {
    pub child: NodeId,
    pub parent: NodeId,
    /// Expansion factor: 1 for a single-hop link, 2 for a relay path.
    pub alpha: u8,
    /// Bits carried by one data slot of the attached physical link.
    pub rate_per_slot: u64,
}

/// Symmetric pairwise interference between logical links, indexed by the
/// links' child ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceMatrix {
    size: usize,
    bits: Vec<bool>,
}

impl InterferenceMatrix {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            bits: vec![false; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: NodeId, b: NodeId) -> bool {
        self.bits[a.0 * self.size + b.0]
    }

    /// Marks `a` and `b` as interfering in both directions. Self pairs are
    /// rejected to keep the diagonal zero.
    pub fn set(&mut self, a: NodeId, b: NodeId) -> Result<(), TopologyError> {
        if a == b {
            return Err(TopologyError::Malformed(format!(
                "link {a} cannot interfere with itself"
            )));
        }
        if a.0 >= self.size || b.0 >= self.size {
            return Err(TopologyError::Malformed(format!(
                "interference pair ({a}, {b}) out of range"
            )));
        }
        self.bits[a.0 * self.size + b.0] = true;
        self.bits[b.0 * self.size + a.0] = true;
        Ok(())
    }

    /// Interfering pairs with `a < b`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for a in 0..self.size {
            for b in (a + 1)..self.size {
                if self.bits[a * self.size + b] {
                    out.push((NodeId(a), NodeId(b)));
                }
            }
        }
        out
    }

    pub fn is_symmetric_with_zero_diagonal(&self) -> bool {
        (0..self.size).all(|a| {
            !self.bits[a * self.size + a]
                && (0..self.size)
                    .all(|b| self.bits[a * self.size + b] == self.bits[b * self.size + a])
        })
    }
}

/// The static backhaul network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    parents: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    alphas: Vec<u8>,
    radio_chains: Vec<u32>,
    interference: InterferenceMatrix,
    heights: Vec<u32>,
    /// `route[i][k]`: child of `i` whose subtree contains `k`.
    route: Vec<Vec<Option<NodeId>>>,
    rate_per_slot: u64,
}

/// One node of a topology description, used to build a [`TreeTopology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSpec {
    pub parent: Option<NodeId>,
    /// Ignored for the macro-cell BS.
    pub alpha: u8,
    pub radio_chains: u32,
}

impl TreeTopology {
    /// Builds and validates a topology. `nodes[0]` is the macro-cell BS and
    /// must have no parent; every other node must have one.
    pub fn new(
        nodes: &[NodeSpec],
        interfering_pairs: &[(NodeId, NodeId)],
        rate_per_slot: u64,
    ) -> Result<Self, TopologyError> {
        let n = nodes.len();
        if n < 2 {
            return Err(TopologyError::InvalidConfig(
                "a backhaul tree needs at least 2 nodes".into(),
            ));
        }
        if rate_per_slot == 0 {
            return Err(TopologyError::InvalidConfig(
                "rate_per_slot must be positive".into(),
            ));
        }
        let mut parents = Vec::with_capacity(n);
        let mut alphas = Vec::with_capacity(n);
        let mut radio_chains = Vec::with_capacity(n);
        for (i, spec) in nodes.iter().enumerate() {
            match (i, spec.parent) {
                (0, Some(_)) => {
                    return Err(TopologyError::Malformed(
                        "macro-cell BS cannot have a parent".into(),
                    ))
                }
                (i, None) if i > 0 => {
                    return Err(TopologyError::Malformed(format!("node {i} has no parent")))
                }
                (_, Some(p)) if p.0 >= n => {
                    return Err(TopologyError::Malformed(format!(
                        "node {i} has unknown parent {p}"
                    )))
                }
                _ => {}
            }
            if i > 0 && !(spec.alpha == 1 || spec.alpha == 2) {
                return Err(TopologyError::Malformed(format!(
                    "link {i} has alpha {} (must be 1 or 2)",
                    spec.alpha
                )));
            }
            if spec.radio_chains == 0 {
                return Err(TopologyError::Malformed(format!(
                    "node {i} has no radio chain"
                )));
            }
            parents.push(spec.parent);
            alphas.push(if i == 0 { 1 } else { spec.alpha });
            radio_chains.push(spec.radio_chains);
        }

        let heights = compute_heights_from_parents(&parents)?;

        let mut children = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                children[p.0].push(NodeId(i));
            }
        }

        let mut interference = InterferenceMatrix::new(n);
        for &(a, b) in interfering_pairs {
            if a.is_macro() || b.is_macro() || a.0 >= n || b.0 >= n {
                return Err(TopologyError::Malformed(format!(
                    "interference pair ({a}, {b}) does not name two links"
                )));
            }
            let share_endpoint =
                parents[a.0] == parents[b.0] || parents[a.0] == Some(b) || parents[b.0] == Some(a);
            if !share_endpoint {
                return Err(TopologyError::Malformed(format!(
                    "links {a} and {b} share no endpoint BS"
                )));
            }
            interference.set(a, b)?;
        }

        let mut route = vec![vec![None; n]; n];
        for k in 1..n {
            let mut cur = NodeId(k);
            while let Some(p) = parents[cur.0] {
                route[p.0][k] = Some(cur);
                cur = p;
            }
        }

        Ok(Self {
            parents,
            children,
            alphas,
            radio_chains,
            interference,
            heights,
            route,
            rate_per_slot,
        })
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId)
    }

    pub fn small_cells(&self) -> impl Iterator<Item = NodeId> + '_ {
        (1..self.len()).map(NodeId)
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parents[node.0]
    }

    /// Children in ascending id order.
    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.children[node.0]
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.children[node.0].is_empty()
    }

    pub fn alpha(&self, link: NodeId) -> u8 {
        self.alphas[link.0]
    }

    pub fn radio_chains(&self, node: NodeId) -> u32 {
        self.radio_chains[node.0]
    }

    pub fn interferes(&self, a: NodeId, b: NodeId) -> bool {
        self.interference.get(a, b)
    }

    pub fn interference(&self) -> &InterferenceMatrix {
        &self.interference
    }

    pub fn rate_per_slot(&self) -> u64 {
        self.rate_per_slot
    }

    pub fn height(&self, node: NodeId) -> u32 {
        self.heights[node.0]
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    /// Depth H of the tree, i.e. the macro-cell BS's height.
    pub fn depth(&self) -> u32 {
        self.heights[0]
    }

    pub fn link(&self, child: NodeId) -> Option<LogicalLink> {
        self.parents[child.0].map(|parent| LogicalLink {
            child,
            parent,
            alpha: self.alphas[child.0],
            rate_per_slot: self.rate_per_slot,
        })
    }

    pub fn links(&self) -> Vec<LogicalLink> {
        self.small_cells().filter_map(|c| self.link(c)).collect()
    }

    /// Child of `node` on the path towards `dest`, or `None` when `dest` is
    /// not strictly below `node`.
    pub fn next_hop(&self, node: NodeId, dest: NodeId) -> Option<NodeId> {
        self.route[node.0][dest.0]
    }

    /// Whether `member` lies in the subtree rooted at `root` (inclusive).
    pub fn in_subtree(&self, root: NodeId, member: NodeId) -> bool {
        root == member || self.route[root.0][member.0].is_some()
    }

    /// Nodes of the subtree rooted at `root`, ascending.
    pub fn subtree(&self, root: NodeId) -> Vec<NodeId> {
        self.nodes().filter(|&k| self.in_subtree(root, k)).collect()
    }

    pub fn subtree_size(&self, root: NodeId) -> usize {
        self.nodes().filter(|&k| self.in_subtree(root, k)).count()
    }

    /// Hops between `node` and the macro-cell BS.
    pub fn hops_to_macro(&self, node: NodeId) -> u32 {
        let mut hops = 0;
        let mut cur = node;
        while let Some(p) = self.parents[cur.0] {
            hops += 1;
            cur = p;
        }
        hops
    }

    /// Logical links attached to `node`: its parent link (if any) followed by
    /// its child links.
    pub fn attached_links(&self, node: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        if self.parents[node.0].is_some() {
            out.push(node);
        }
        out.extend(self.children[node.0].iter().copied());
        out
    }

    pub fn with_radio_chains(mut self, chains: Vec<u32>) -> Result<Self, TopologyError> {
        if chains.len() != self.len() {
            return Err(TopologyError::InvalidConfig(format!(
                "expected {} radio chain counts, got {}",
                self.len(),
                chains.len()
            )));
        }
        if let Some(i) = chains.iter().position(|&c| c == 0) {
            return Err(TopologyError::InvalidConfig(format!(
                "node {i} has no radio chain"
            )));
        }
        self.radio_chains = chains;
        Ok(self)
    }

    pub fn with_rate_per_slot(mut self, rate: u64) -> Result<Self, TopologyError> {
        if rate == 0 {
            return Err(TopologyError::InvalidConfig(
                "rate_per_slot must be positive".into(),
            ));
        }
        self.rate_per_slot = rate;
        Ok(self)
    }

    /// Radio chain count equal to the number of attached links at every node,
    /// so the per-slot radio constraint can never bind.
    pub fn ample_radio_chains(&self) -> Vec<u32> {
        self.nodes()
            .map(|n| self.attached_links(n).len().max(1) as u32)
            .collect()
    }

    pub fn node_specs(&self) -> Vec<NodeSpec> {
        self.nodes()
            .map(|n| NodeSpec {
                parent: self.parents[n.0],
                alpha: self.alphas[n.0],
                radio_chains: self.radio_chains[n.0],
            })
            .collect()
    }

    /// Line-oriented text form:
    ///
    /// ```text
    /// rate_per_slot <bits>
    /// node <id> <parent|-> <alpha> <radio_chains>
    /// interfere <link> <link>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::from("# backhaul topology\n");
        let _ = writeln!(out, "rate_per_slot {}", self.rate_per_slot);
        for n in self.nodes() {
            let parent = match self.parents[n.0] {
                Some(p) => p.to_string(),
                None => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "node {} {} {} {}",
                n, parent, self.alphas[n.0], self.radio_chains[n.0]
            );
        }
        for (a, b) in self.interference.pairs() {
            let _ = writeln!(out, "interfere {a} {b}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TopologyError> {
        let mut rate = None;
        let mut nodes: Vec<Option<NodeSpec>> = Vec::new();
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: &str| TopologyError::Parse {
                line: line_no,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(&format!("bad number {s:?}")))
            };
            match fields.as_slice() {
                ["rate_per_slot", r] => {
                    rate = Some(r.parse::<u64>().map_err(|_| parse_err("bad rate"))?);
                }
                ["node", id, parent, alpha, radios] => {
                    let id = num(id)?;
                    let parent = if *parent == "-" {
                        None
                    } else {
                        Some(NodeId(num(parent)?))
                    };
                    let alpha = alpha.parse::<u8>().map_err(|_| parse_err("bad alpha"))?;
                    let radio_chains = radios
                        .parse::<u32>()
                        .map_err(|_| parse_err("bad radio count"))?;
                    if nodes.len() <= id {
                        nodes.resize(id + 1, None);
                    }
                    if nodes[id].is_some() {
                        return Err(parse_err(&format!("duplicate node {id}")));
                    }
                    nodes[id] = Some(NodeSpec {
                        parent,
                        alpha,
                        radio_chains,
                    });
                }
                ["interfere", a, b] => pairs.push((NodeId(num(a)?), NodeId(num(b)?))),
                _ => return Err(parse_err(&format!("unrecognised record {line:?}"))),
            }
        }
        let nodes = nodes
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or_else(|| TopologyError::Malformed(format!("node {i} missing"))))
            .collect::<Result<Vec<_>, _>>()?;
        let rate = rate.ok_or_else(|| TopologyError::Malformed("rate_per_slot missing".into()))?;
        TreeTopology::new(&nodes, &pairs, rate)
    }
}

/// Heights of every node: leaves are 1, internal nodes 1 + max child height.
pub fn compute_heights(topology: &TreeTopology) -> Result<Vec<u32>, TopologyError> {
    let parents: Vec<Option<NodeId>> = topology.nodes().map(|n| topology.parent(n)).collect();
    compute_heights_from_parents(&parents)
}

pub(crate) fn compute_heights_from_parents(
    parents: &[Option<NodeId>],
) -> Result<Vec<u32>, TopologyError> {
    let n = parents.len();
    // Every node must reach the root within n steps, otherwise there is a cycle.
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0;
        while let Some(p) = parents[cur] {
            cur = p.0;
            steps += 1;
            if steps > n {
                return Err(TopologyError::Malformed(format!(
                    "cycle detected through node {start}"
                )));
            }
        }
        if cur != 0 {
            return Err(TopologyError::Malformed(format!(
                "node {start} is not connected to the macro-cell BS"
            )));
        }
    }
    let mut heights = vec![1u32; n];
    // Propagating up from each node is O(n * depth), fine for desk-scale trees.
    for start in 0..n {
        let mut cur = start;
        let mut h = 1;
        while let Some(p) = parents[cur] {
            h += 1;
            if heights[p.0] < h {
                heights[p.0] = h;
            }
            cur = p.0;
        }
    }
    Ok(heights)
}

/// Inputs of the random tree generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub num_nodes: usize,
    pub max_children: usize,
    pub interference_pair_fraction: f64,
    pub multihop_fraction: f64,
    pub seed: u64,
}

// Independent streams so that changing one fraction leaves the other draws intact.
const STRUCTURE_STREAM: u64 = 0x5452_4545;
const ALPHA_STREAM: u64 = 0x414c_5048;
const INTERFERENCE_STREAM: u64 = 0x494e_5446;

/// Link reach in units of the deployment radius.
const LINK_RANGE: f64 = 0.5;

fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

/// Random geometric tree with at most `max_children` children per node.
/// Multi-hop links and interfering pairs are chosen as exact fractions
/// (rounded) of the candidate sets.
pub fn generate_tree(params: &TreeParams) -> Result<TreeTopology, TopologyError> {
    let TreeParams {
        num_nodes,
        max_children,
        interference_pair_fraction,
        multihop_fraction,
        seed,
    } = *params;
    if num_nodes < 2 {
        return Err(TopologyError::InvalidConfig(format!(
            "num_nodes must be at least 2, got {num_nodes}"
        )));
    }
    if max_children == 0 {
        return Err(TopologyError::InvalidConfig(
            "max_children must be positive".into(),
        ));
    }
    for (name, v) in [
        ("interference_pair_fraction", interference_pair_fraction),
        ("multihop_fraction", multihop_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(TopologyError::InvalidConfig(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }

    // Small cells are dropped uniformly over a unit disc around the macro and
    // attached in order of distance from it. A cell may join any placed node
    // with room within LINK_RANGE (or its nearest such node when none is in
    // range); among those it prefers the macro, then the candidate whose macro
    // branch carries the fewest cells, then the nearest.
    let mut rng = stream(seed, STRUCTURE_STREAM);
    let mut points: Vec<(f64, f64)> = (1..num_nodes)
        .map(|_| {
            let r = rng.random::<f64>().sqrt();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            (r * theta.cos(), r * theta.sin())
        })
        .collect();
    points.sort_by(|a, b| a.0.hypot(a.1).total_cmp(&b.0.hypot(b.1)));
    points.insert(0, (0.0, 0.0));
    let dist = |a: usize, b: usize| (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);

    let mut parents: Vec<Option<NodeId>> = vec![None];
    let mut child_count = vec![0usize];
    let mut branch = vec![0usize];
    let mut branch_size = vec![0usize; num_nodes];
    for i in 1..num_nodes {
        let open: Vec<usize> = (0..i).filter(|&p| child_count[p] < max_children).collect();
        let nearest = open
            .iter()
            .map(|&p| dist(p, i))
            .fold(f64::INFINITY, f64::min);
        let reach = LINK_RANGE.max(nearest);
        let p = open
            .into_iter()
            .filter(|&p| dist(p, i) <= reach)
            .min_by(|&a, &b| {
                let load = |p: usize| if p == 0 { 0 } else { branch_size[branch[p]] };
                load(a)
                    .cmp(&load(b))
                    .then(dist(a, i).total_cmp(&dist(b, i)))
            })
            .expect("an earlier node always has room");
        parents.push(Some(NodeId(p)));
        child_count[p] += 1;
        child_count.push(0);
        let b = if p == 0 { i } else { branch[p] };
        branch.push(b);
        branch_size[b] += 1;
    }

    let mut rng = stream(seed, ALPHA_STREAM);
    let mut links: Vec<usize> = (1..num_nodes).collect();
    links.shuffle(&mut rng);
    let multihop = (multihop_fraction * links.len() as f64).round() as usize;
    let mut alphas = vec![1u8; num_nodes];
    for &l in &links[..multihop] {
        alphas[l] = 2;
    }

    let mut candidates = BTreeSet::new();
    for a in 1..num_nodes {
        for b in (a + 1)..num_nodes {
            let share = parents[a] == parents[b]
                || parents[a] == Some(NodeId(b))
                || parents[b] == Some(NodeId(a));
            if share {
                candidates.insert((NodeId(a), NodeId(b)));
            }
        }
    }
    let mut candidates: Vec<_> = candidates.into_iter().collect();
    let mut rng = stream(seed, INTERFERENCE_STREAM);
    candidates.shuffle(&mut rng);
    let chosen = (interference_pair_fraction * candidates.len() as f64).round() as usize;
    let mut pairs = candidates[..chosen].to_vec();
    pairs.sort();

    let mut specs: Vec<NodeSpec> = (0..num_nodes)
        .map(|i| NodeSpec {
            parent: parents[i],
            alpha: alphas[i],
            radio_chains: 1,
        })
        .collect();
    // Enough radios for every attached link unless a scenario overrides it.
    for (i, spec) in specs.iter_mut().enumerate() {
        let attached = child_count[i] + usize::from(i > 0);
        spec.radio_chains = attached.max(1) as u32;
    }
    let rate = (DEFAULT_LINK_RATE_BPS * DEFAULT_SLOT_DURATION_S).round() as u64;
    TreeTopology::new(&specs, &pairs, rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(parent: Option<usize>) -> NodeSpec {
        NodeSpec {
            parent: parent.map(NodeId),
            alpha: 1,
            radio_chains: 1,
        }
    }

    fn params(num_nodes: usize, seed: u64) -> TreeParams {
        TreeParams {
            num_nodes,
            max_children: 4,
            interference_pair_fraction: 0.0,
            multihop_fraction: 0.0,
            seed,
        }
    }

    #[test]
    fn smallest_tree() {
        let t = generate_tree(&params(2, 7)).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.parent(NodeId(1)), Some(NodeId::MACRO));
        assert_eq!(t.alpha(NodeId(1)), 1);
        assert!(t.interference().pairs().is_empty());
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(matches!(
            generate_tree(&params(1, 0)),
            Err(TopologyError::InvalidConfig(_))
        ));
    }

    #[test]
    fn heights_of_chain_star_and_binary_tree() {
        let chain = TreeTopology::new(&[spec(None), spec(Some(0)), spec(Some(1))], &[], 1).unwrap();
        assert_eq!(compute_heights(&chain).unwrap(), vec![3, 2, 1]);

        let star = TreeTopology::new(
            &[spec(None), spec(Some(0)), spec(Some(0)), spec(Some(0))],
            &[],
            1,
        )
        .unwrap();
        assert_eq!(compute_heights(&star).unwrap(), vec![2, 1, 1, 1]);

        let bin: Vec<NodeSpec> = (0..7)
            .map(|i| spec(if i == 0 { None } else { Some((i - 1) / 2) }))
            .collect();
        let bin = TreeTopology::new(&bin, &[], 1).unwrap();
        assert_eq!(bin.depth(), 3);
        assert_eq!(compute_heights(&bin).unwrap(), vec![3, 2, 2, 1, 1, 1, 1]);
    }

    #[test]
    fn cycle_is_rejected() {
        let parents = vec![None, Some(NodeId(2)), Some(NodeId(1))];
        assert!(matches!(
            compute_heights_from_parents(&parents),
            Err(TopologyError::Malformed(_))
        ));
    }

    #[test]
    fn interference_requires_shared_endpoint() {
        let nodes = [
            spec(None),
            spec(Some(0)),
            spec(Some(1)),
            spec(Some(0)),
            spec(Some(3)),
        ];
        assert!(TreeTopology::new(&nodes, &[(NodeId(1), NodeId(3))], 1).is_ok());
        assert!(TreeTopology::new(&nodes, &[(NodeId(1), NodeId(2))], 1).is_ok());
        assert!(TreeTopology::new(&nodes, &[(NodeId(2), NodeId(4))], 1).is_err());
        assert!(TreeTopology::new(&nodes, &[(NodeId(2), NodeId(2))], 1).is_err());
    }

    #[test]
    fn routing_follows_tree() {
        let nodes = [spec(None), spec(Some(0)), spec(Some(1)), spec(Some(0))];
        let t = TreeTopology::new(&nodes, &[], 1).unwrap();
        assert_eq!(t.next_hop(NodeId(0), NodeId(2)), Some(NodeId(1)));
        assert_eq!(t.next_hop(NodeId(1), NodeId(2)), Some(NodeId(2)));
        assert_eq!(t.next_hop(NodeId(3), NodeId(2)), None);
        assert_eq!(t.subtree(NodeId(1)), vec![NodeId(1), NodeId(2)]);
        assert_eq!(t.hops_to_macro(NodeId(2)), 2);
    }

    #[test]
    fn generator_respects_fanout_and_fractions() {
        for seed in 0..20 {
            let p = TreeParams {
                num_nodes: 25,
                max_children: 3,
                interference_pair_fraction: 0.25,
                multihop_fraction: 0.2,
                seed,
            };
            let t = generate_tree(&p).unwrap();
            assert_eq!(t.len(), 25);
            assert!(t.nodes().all(|n| t.children(n).len() <= 3));
            let multihop = t.small_cells().filter(|&n| t.alpha(n) == 2).count();
            assert_eq!(multihop, (0.2f64 * 24.0).round() as usize);
            for (a, b) in t.interference().pairs() {
                assert!(
                    t.parent(a) == t.parent(b) || t.parent(a) == Some(b) || t.parent(b) == Some(a)
                );
            }
            assert_eq!(generate_tree(&p).unwrap(), t);
        }
    }

    #[test]
    fn fanout_of_one_gives_a_chain() {
        let t = generate_tree(&TreeParams {
            max_children: 1,
            ..params(6, 3)
        })
        .unwrap();
        assert_eq!(t.depth(), 6);
    }

    #[test]
    fn text_parse_errors_name_the_line() {
        let err = TreeTopology::from_text("rate_per_slot 5\nnode 0 - 1 1\nbogus\n").unwrap_err();
        assert_eq!(
            err,
            TopologyError::Parse {
                line: 3,
                reason: "unrecognised record \"bogus\"".into()
            }
        );
    }
}
