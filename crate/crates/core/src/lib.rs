//! Routing policies for packet-optical networks learned from hybrid
//! telemetry.
//!
//! Link distance, load and pre-FEC BER are turned into latency penalties
//! ([`telemetry`]); tabular Q-learning learns a next-hop policy per
//! destination ([`qlearning`]); Dijkstra over the same penalties checks the
//! result ([`oracle`]); and [`engine`] re-solves as telemetry events arrive.

// `!(x >= 0.0)` is the validation idiom here: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod oracle;
mod par;
pub mod qlearning;
pub mod route;
pub mod synth;
pub mod telemetry;
pub mod topology;

pub use error::{Error, Result};
pub use par::Execution;
pub use route::{PolicyDiff, Route, RouteEntry, RouteFailure, RouteTable};
pub use topology::{load_topology, Link, NodeId, Topology};
