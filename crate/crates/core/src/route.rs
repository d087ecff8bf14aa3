//! Route tables (the extracted policy) and differences between them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// A loop-free path and its summed reward in µs (negative, or zero for the
/// trivial path).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub path: Vec<NodeId>,
    pub total_reward: f64,
}

impl Route {
    pub fn trivial(node: NodeId) -> Self {
        Route {
            path: vec![node],
            total_reward: 0.0,
        }
    }

    /// Dash-joined node sequence, e.g. `1-4-8-7`.
    pub fn display_path(&self) -> String {
        join_path(&self.path)
    }
}

pub(crate) fn join_path(path: &[NodeId]) -> String {
    path.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("-")
}

/// Why greedy extraction did not produce a route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RouteFailure {
    /// Source and destination lie in different components.
    Unreachable,
    /// The greedy walk revisited a node; `path` ends with the repeated node.
    Loop { path: Vec<NodeId> },
    /// The walk exceeded the allowed number of hops.
    TooLong { path: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RouteEntry {
    Path(Route),
    Unreachable,
    NotConverged(RouteFailure),
}

impl RouteEntry {
    pub fn route(&self) -> Option<&Route> {
        match self {
            RouteEntry::Path(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, RouteEntry::NotConverged(_))
    }

    /// Cell text: the dash-joined path, `unreachable`, or `no-convergence`.
    pub fn label(&self) -> String {
        match self {
            RouteEntry::Path(r) => r.display_path(),
            RouteEntry::Unreachable => "unreachable".into(),
            RouteEntry::NotConverged(_) => "no-convergence".into(),
        }
    }

    fn same_path(&self, other: &RouteEntry) -> bool {
        match (self, other) {
            (RouteEntry::Path(a), RouteEntry::Path(b)) => a.path == b.path,
            (RouteEntry::Unreachable, RouteEntry::Unreachable) => true,
            (RouteEntry::NotConverged(_), RouteEntry::NotConverged(_)) => true,
            _ => false,
        }
    }
}

impl From<std::result::Result<Route, RouteFailure>> for RouteEntry {
    fn from(r: std::result::Result<Route, RouteFailure>) -> Self {
        match r {
            Ok(route) => RouteEntry::Path(route),
            Err(RouteFailure::Unreachable) => RouteEntry::Unreachable,
            Err(f) => RouteEntry::NotConverged(f),
        }
    }
}

/// Policy for every ordered pair of distinct nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTable {
    /// Fingerprint of the topology the table was computed on.
    pub topology: String,
    pub nodes: Vec<NodeId>,
    routes: BTreeMap<(NodeId, NodeId), RouteEntry>,
}

impl RouteTable {
    pub fn new(topo: &Topology) -> Self {
        RouteTable {
            topology: topo.fingerprint(),
            nodes: topo.nodes().to_vec(),
            routes: BTreeMap::new(),
        }
    }

    pub fn from_parts(topology: String, nodes: Vec<NodeId>) -> Self {
        RouteTable {
            topology,
            nodes,
            routes: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, src: NodeId, dst: NodeId, entry: RouteEntry) {
        self.routes.insert((src, dst), entry);
    }

    pub fn get(&self, src: NodeId, dst: NodeId) -> Option<&RouteEntry> {
        self.routes.get(&(src, dst))
    }

    pub fn route(&self, src: NodeId, dst: NodeId) -> Option<&Route> {
        self.get(src, dst).and_then(RouteEntry::route)
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    /// Entries ordered by (src, dst).
    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), &RouteEntry)> {
        self.routes.iter().map(|(&k, v)| (k, v))
    }

    /// Pairs whose extraction failed to converge.
    pub fn failures(&self) -> Vec<(NodeId, NodeId)> {
        self.iter().filter(|(_, e)| e.is_failure()).map(|(k, _)| k).collect()
    }

    /// Route-by-route equality, including rewards.
    pub fn same_routes(&self, other: &RouteTable) -> bool {
        self.topology == other.topology && self.routes == other.routes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffEntry {
    pub src: NodeId,
    pub dst: NodeId,
    #[serde(serialize_with = "ser_entry")]
    pub old: RouteEntry,
    #[serde(serialize_with = "ser_entry")]
    pub new: RouteEntry,
}

fn ser_entry<S: serde::Serializer>(e: &RouteEntry, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Entry", 2)?;
    st.serialize_field("path", &e.label())?;
    st.serialize_field("reward", &e.route().map(|r| r.total_reward))?;
    st.end()
}

/// Pairs whose path sequence changed between two tables.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PolicyDiff {
    pub entries: Vec<DiffEntry>,
    pub changed: usize,
    pub unchanged: usize,
    pub newly_unreachable: usize,
}

impl PolicyDiff {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, src: NodeId, dst: NodeId) -> Option<&DiffEntry> {
        self.entries.iter().find(|e| e.src == src && e.dst == dst)
    }
}

pub fn diff_tables(old: &RouteTable, new: &RouteTable) -> Result<PolicyDiff> {
    if old.topology != new.topology || old.nodes != new.nodes {
        return Err(Error::TopologyMismatch);
    }
    let mut diff = PolicyDiff::default();
    let keys: std::collections::BTreeSet<_> = old.routes.keys().chain(new.routes.keys()).collect();
    for &(src, dst) in keys {
        let a = old.get(src, dst).cloned().unwrap_or(RouteEntry::Unreachable);
        let b = new.get(src, dst).cloned().unwrap_or(RouteEntry::Unreachable);
        if a.same_path(&b) {
            diff.unchanged += 1;
        } else {
            if b == RouteEntry::Unreachable {
                diff.newly_unreachable += 1;
            }
            diff.entries.push(DiffEntry {
                src,
                dst,
                old: a,
                new: b,
            });
        }
    }
    diff.changed = diff.entries.len();
    Ok(diff)
}
