//! Network graph model: nodes, undirected links with static attributes, and
//! the sorted adjacency the learner uses as its action sets.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default line rate of a link, 10 Gb/s.
pub const DEFAULT_CAPACITY_BPS: f64 = 10e9;

/// Positive, 1-based node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Canonical key for an undirected link: smaller id first.
pub fn link_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Undirected link. Endpoints are stored with `endpoint_a < endpoint_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub endpoint_a: NodeId,
    pub endpoint_b: NodeId,
    pub distance_km: f64,
    pub capacity_bps: f64,
}

impl Link {
    pub fn new(a: impl Into<NodeId>, b: impl Into<NodeId>, distance_km: f64) -> Self {
        let (endpoint_a, endpoint_b) = link_key(a.into(), b.into());
        Link {
            endpoint_a,
            endpoint_b,
            distance_km,
            capacity_bps: DEFAULT_CAPACITY_BPS,
        }
    }

    pub fn key(&self) -> (NodeId, NodeId) {
        (self.endpoint_a, self.endpoint_b)
    }
}

/// One directed adjacency entry in the compressed adjacency arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Hop {
    /// Dense index of the neighbor.
    pub to: usize,
    /// Index into `Topology::links`.
    pub link: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDoc {
    nodes: Vec<u32>,
    links: Vec<LinkDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    a: u32,
    b: u32,
    distance_km: f64,
    #[serde(default = "default_capacity")]
    capacity_bps: f64,
}

fn default_capacity() -> f64 {
    DEFAULT_CAPACITY_BPS
}

/// Immutable validated topology.
///
/// Nodes are kept sorted by id and addressed internally by their dense
/// position, so "ascending id" and "ascending index" coincide everywhere.
#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    links: Vec<Link>,
    offsets: Vec<usize>,
    hops: Vec<Hop>,
    component: Vec<usize>,
}

/// Parses and validates a topology document.
pub fn load_topology(doc: &str) -> Result<Topology> {
    Topology::from_json(doc)
}

impl Topology {
    pub fn from_json(doc: &str) -> Result<Self> {
        let doc: TopologyDoc = serde_json::from_str(doc)?;
        let links = doc
            .links
            .iter()
            .map(|l| Link {
                endpoint_a: NodeId(l.a),
                endpoint_b: NodeId(l.b),
                distance_km: l.distance_km,
                capacity_bps: l.capacity_bps,
            })
            .collect();
        Topology::new(doc.nodes.into_iter().map(NodeId).collect(), links)
    }

    /// Builds a topology, checking every structural rule. Link endpoints may
    /// be given in either order.
    pub fn new(nodes: Vec<NodeId>, links: Vec<Link>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::NoNodes);
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, &id) in nodes.iter().enumerate() {
            if id.0 == 0 {
                return Err(Error::ZeroNodeId { index: i });
            }
            if index.insert(id, i).is_some() {
                return Err(Error::DuplicateNode { id, index: i });
            }
        }
        let mut sorted_nodes = nodes;
        sorted_nodes.sort_unstable();
        let index: HashMap<NodeId, usize> = sorted_nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();

        let mut seen = HashMap::with_capacity(links.len());
        let mut canon = Vec::with_capacity(links.len());
        for (i, l) in links.into_iter().enumerate() {
            if l.endpoint_a == l.endpoint_b {
                return Err(Error::SelfLoop {
                    node: l.endpoint_a,
                    index: i,
                });
            }
            for end in [l.endpoint_a, l.endpoint_b] {
                if !index.contains_key(&end) {
                    return Err(Error::UnknownEndpoint { node: end, index: i });
                }
            }
            if !(l.distance_km >= 0.0) || !l.distance_km.is_finite() {
                return Err(Error::NegativeDistance {
                    distance_km: l.distance_km,
                    index: i,
                });
            }
            if !(l.capacity_bps > 0.0) || !l.capacity_bps.is_finite() {
                return Err(Error::BadCapacity {
                    capacity_bps: l.capacity_bps,
                    index: i,
                });
            }
            let (a, b) = link_key(l.endpoint_a, l.endpoint_b);
            if seen.insert((a, b), i).is_some() {
                return Err(Error::DuplicateLink { a, b, index: i });
            }
            canon.push(Link {
                endpoint_a: a,
                endpoint_b: b,
                ..l
            });
        }
        canon.sort_by_key(|l| l.key());

        let n = sorted_nodes.len();
        let mut adj: Vec<Vec<Hop>> = vec![Vec::new(); n];
        for (li, l) in canon.iter().enumerate() {
            let ia = index[&l.endpoint_a];
            let ib = index[&l.endpoint_b];
            adj[ia].push(Hop { to: ib, link: li });
            adj[ib].push(Hop { to: ia, link: li });
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut hops = Vec::with_capacity(2 * canon.len());
        offsets.push(0);
        for mut list in adj {
            list.sort_unstable_by_key(|h| h.to);
            hops.extend(list);
            offsets.push(hops.len());
        }

        let mut topo = Topology {
            nodes: sorted_nodes,
            index,
            links: canon,
            offsets,
            hops,
            component: Vec::new(),
        };
        topo.component = topo.label_components();
        Ok(topo)
    }

    fn label_components(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = std::collections::VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for h in self.hops_of(u) {
                    if label[h.to] == usize::MAX {
                        label[h.to] = next;
                        queue.push_back(h.to);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Node ids in ascending order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Links in canonical order (sorted by endpoint pair).
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub(crate) fn index_of(&self, id: NodeId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub(crate) fn node_at(&self, idx: usize) -> NodeId {
        self.nodes[idx]
    }

    pub(crate) fn hops_of(&self, idx: usize) -> &[Hop] {
        &self.hops[self.offsets[idx]..self.offsets[idx + 1]]
    }

    /// Position of the first directed adjacency entry of node `idx`.
    pub(crate) fn hop_offset(&self, idx: usize) -> usize {
        self.offsets[idx]
    }

    /// Number of directed adjacency entries (twice the link count).
    pub(crate) fn hop_count(&self) -> usize {
        self.hops.len()
    }

    /// Index of the directed entry `from -> to`, if adjacent.
    pub(crate) fn hop_index(&self, from: usize, to: usize) -> Option<usize> {
        let hops = self.hops_of(from);
        hops.binary_search_by_key(&to, |h| h.to)
            .ok()
            .map(|k| self.offsets[from] + k)
    }

    pub(crate) fn same_component(&self, a: usize, b: usize) -> bool {
        self.component[a] == self.component[b]
    }

    /// Index of the link joining `a` and `b`.
    pub fn link_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        let ia = *self.index.get(&a)?;
        let ib = *self.index.get(&b)?;
        self.hop_index(ia, ib).map(|h| self.hops[h].link)
    }

    /// Ascending neighbor ids of `s`.
    pub fn neighbors(&self, s: NodeId) -> Result<Vec<NodeId>> {
        let i = self.index_of(s)?;
        Ok(self.hops_of(i).iter().map(|h| self.nodes[h.to]).collect())
    }

    pub fn degree(&self, s: NodeId) -> Result<usize> {
        let i = self.index_of(s)?;
        Ok(self.offsets[i + 1] - self.offsets[i])
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn connectivity_report(&self) -> Vec<Vec<NodeId>> {
        let count = self.component.iter().copied().max().map_or(0, |m| m + 1);
        let mut comps = vec![Vec::new(); count];
        for (i, &c) in self.component.iter().enumerate() {
            comps[c].push(self.nodes[i]);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.component.iter().all(|&c| c == 0)
    }

    /// Stable 64-bit FNV-1a digest of the node set and link endpoints, used
    /// to tie exported route tables to the topology they were computed on.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u32| {
            for byte in v.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.nodes.len() as u32);
        for n in &self.nodes {
            eat(n.0);
        }
        eat(self.links.len() as u32);
        for l in &self.links {
            eat(l.endpoint_a.0);
            eat(l.endpoint_b.0);
        }
        format!("{h:016x}")
    }

    /// Serializes back into the document schema.
    pub fn to_json(&self) -> String {
        let doc = TopologyDoc {
            nodes: self.nodes.iter().map(|n| n.0).collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkDoc {
                    a: l.endpoint_a.0,
                    b: l.endpoint_b.0,
                    distance_km: l.distance_km,
                    capacity_bps: l.capacity_bps,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("topology serializes")
    }
}
