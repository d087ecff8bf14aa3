//! Reference networks shipped with the crate.
//!
//! `eight_node`: 8 nodes and 9 links whose penalties (µs) are
//! 1-2=40, 1-4=15, 2-3=30, 2-5=10, 3-4=30, 4-8=16, 5-6=30, 6-7=30, 7-8=50,
//! encoded as distances at zero load and BER 1e-6. The degraded variant
//! raises BER on 3-4 and 7-8 to 1e-4.
//!
//! `tokyo`: a 23-node metro mesh. Its link costs were fitted so that the
//! routes 1->22, 4->7, 4->11 and 1->19 take prescribed primary paths, and
//! prescribed secondary paths after BER degradation of 1-6, 1-4 and 10-11.

use crate::error::Result;
use crate::telemetry::{parse_event_stream, TelemetryEvent, TelemetrySnapshot};
use crate::topology::Topology;

pub const EIGHT_NODE_TOPOLOGY: &str = include_str!("../../../fixtures/eight_node.topology.json");
pub const EIGHT_NODE_NOMINAL: &str = include_str!("../../../fixtures/eight_node.nominal.json");
pub const EIGHT_NODE_DEGRADED: &str = include_str!("../../../fixtures/eight_node.degraded.json");
pub const EIGHT_NODE_EVENTS: &str = include_str!("../../../fixtures/eight_node.events.jsonl");

pub const TOKYO_TOPOLOGY: &str = include_str!("../../../fixtures/tokyo.topology.json");
pub const TOKYO_NOMINAL: &str = include_str!("../../../fixtures/tokyo.nominal.json");
pub const TOKYO_DEGRADED: &str = include_str!("../../../fixtures/tokyo.degraded.json");
pub const TOKYO_EVENTS: &str = include_str!("../../../fixtures/tokyo.events.jsonl");

/// A topology with its nominal and degraded telemetry and the event stream
/// that turns one into the other.
pub struct Fixture {
    pub topology: Topology,
    pub nominal: TelemetrySnapshot,
    pub degraded: TelemetrySnapshot,
    pub events: Vec<TelemetryEvent>,
}

fn load(topo: &str, nominal: &str, degraded: &str, events: &str) -> Result<Fixture> {
    Ok(Fixture {
        topology: Topology::from_json(topo)?,
        nominal: TelemetrySnapshot::from_json(nominal)?,
        degraded: TelemetrySnapshot::from_json(degraded)?,
        events: parse_event_stream(events)?,
    })
}

pub fn eight_node() -> Fixture {
    load(
        EIGHT_NODE_TOPOLOGY,
        EIGHT_NODE_NOMINAL,
        EIGHT_NODE_DEGRADED,
        EIGHT_NODE_EVENTS,
    )
    .expect("bundled fixture is valid")
}

pub fn tokyo() -> Fixture {
    load(TOKYO_TOPOLOGY, TOKYO_NOMINAL, TOKYO_DEGRADED, TOKYO_EVENTS).expect("bundled fixture is valid")
}
