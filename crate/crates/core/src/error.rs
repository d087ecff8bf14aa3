use crate::topology::NodeId;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(String),

    #[error("no nodes")]
    NoNodes,

    #[error("duplicate node id {id} at nodes[{index}]")]
    DuplicateNode { id: NodeId, index: usize },

    #[error("node id must be positive, got 0 at nodes[{index}]")]
    ZeroNodeId { index: usize },

    #[error("duplicate link {a}-{b} at links[{index}]")]
    DuplicateLink { a: NodeId, b: NodeId, index: usize },

    #[error("self-loop on node {node} at links[{index}]")]
    SelfLoop { node: NodeId, index: usize },

    #[error("unknown endpoint {node} at links[{index}]")]
    UnknownEndpoint { node: NodeId, index: usize },

    #[error("negative distance {distance_km} km at links[{index}]")]
    NegativeDistance { distance_km: f64, index: usize },

    #[error("non-positive capacity {capacity_bps} bps at links[{index}]")]
    BadCapacity { capacity_bps: f64, index: usize },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("unknown link {0}-{1}")]
    UnknownLink(NodeId, NodeId),

    #[error("no telemetry for link {0}-{1}")]
    MissingTelemetry(NodeId, NodeId),

    #[error("duplicate telemetry for link {a}-{b} at telemetry[{index}]")]
    DuplicateTelemetry { a: NodeId, b: NodeId, index: usize },

    #[error("load {0} outside [0, 1)")]
    LoadOutOfDomain(f64),

    #[error("ber {0} outside [0, 1]")]
    BerOutOfDomain(f64),

    #[error("invalid reward model: {0}")]
    RewardModel(String),

    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),

    #[error("invalid state-action pair ({0}, {1})")]
    InvalidAction(NodeId, NodeId),

    #[error("node {0} has no neighbors")]
    NoNeighbors(NodeId),

    #[error("event at t={time} precedes snapshot time {snapshot_time}")]
    OutOfOrderEvent { time: f64, snapshot_time: f64 },

    #[error("event line {line}: {msg}")]
    EventLine { line: usize, msg: String },

    #[error("route tables cover different topologies")]
    TopologyMismatch,

    #[error("pair {src}->{dst} not in route table ({available} pairs available)")]
    PairNotFound { src: NodeId, dst: NodeId, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
