//! Per-link telemetry, the latency penalty rules, and the reward matrix
//! derived from them.
//!
//! Every link contributes three additive penalties, all in microseconds:
//! propagation (`5 µs/km`), M/M/1 sojourn (`1 µs / (1 - load)`), and a
//! step penalty on pre-FEC BER. Rewards are the exact negated penalties.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{link_key, Link, NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkTelemetry {
    pub load: f64,
    pub ber: f64,
}

impl LinkTelemetry {
    pub fn new(load: f64, ber: f64) -> Result<Self> {
        check_load(load)?;
        check_ber(ber)?;
        Ok(LinkTelemetry { load, ber })
    }
}

fn check_load(load: f64) -> Result<()> {
    if (0.0..1.0).contains(&load) {
        Ok(())
    } else {
        Err(Error::LoadOutOfDomain(load))
    }
}

fn check_ber(ber: f64) -> Result<()> {
    if (0.0..=1.0).contains(&ber) {
        Ok(())
    } else {
        Err(Error::BerOutOfDomain(ber))
    }
}

/// One BER penalty step. A link whose BER exceeds `threshold` (or equals
/// it, when `inclusive`) pays `penalty_us`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerTier {
    pub threshold: f64,
    pub penalty_us: f64,
    pub inclusive: bool,
}

impl BerTier {
    fn matches(&self, ber: f64) -> bool {
        if self.inclusive {
            ber >= self.threshold
        } else {
            ber > self.threshold
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardModel {
    /// Propagation delay per kilometer of fiber, µs/km.
    pub propagation_us_per_km: f64,
    /// Mean service time of one packet at zero load, µs.
    pub service_time_us: f64,
    /// Tiers in strictly decreasing threshold order; first match wins.
    pub ber_tiers: Vec<BerTier>,
    /// Penalty when no tier matches.
    pub ber_floor_penalty_us: f64,
    /// When set, the service time is derived per link as
    /// `packet_bits / capacity_bps` instead of `service_time_us`.
    pub packet_bits: Option<f64>,
}

impl Default for RewardModel {
    fn default() -> Self {
        RewardModel {
            propagation_us_per_km: 5.0,
            service_time_us: 1.0,
            ber_tiers: vec![
                BerTier {
                    threshold: 1e-4,
                    penalty_us: 1000.0,
                    inclusive: true,
                },
                BerTier {
                    threshold: 1e-5,
                    penalty_us: 50.0,
                    inclusive: false,
                },
            ],
            ber_floor_penalty_us: 0.0,
            packet_bits: None,
        }
    }
}

impl RewardModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::RewardModel(m.to_string()));
        if !(self.propagation_us_per_km >= 0.0) {
            return bad("propagation coefficient must be non-negative");
        }
        if !(self.service_time_us > 0.0) {
            return bad("service time must be positive");
        }
        if let Some(bits) = self.packet_bits {
            if !(bits > 0.0) {
                return bad("packet size must be positive");
            }
        }
        if self.ber_tiers.windows(2).any(|w| !(w[0].threshold > w[1].threshold)) {
            return bad("BER thresholds must be strictly decreasing");
        }
        if self.ber_floor_penalty_us < 0.0 || self.ber_tiers.iter().any(|t| !(t.penalty_us >= 0.0)) {
            return bad("BER penalties must be non-negative");
        }
        Ok(())
    }

    /// Same model with every penalty constant multiplied by `c`.
    pub fn scaled(&self, c: f64) -> RewardModel {
        RewardModel {
            propagation_us_per_km: self.propagation_us_per_km * c,
            service_time_us: self.service_time_us * c,
            ber_tiers: self
                .ber_tiers
                .iter()
                .map(|t| BerTier {
                    penalty_us: t.penalty_us * c,
                    ..*t
                })
                .collect(),
            ber_floor_penalty_us: self.ber_floor_penalty_us * c,
            packet_bits: self.packet_bits.map(|b| b * c),
        }
    }
}

pub fn ber_penalty(model: &RewardModel, ber: f64) -> Result<f64> {
    check_ber(ber)?;
    Ok(model
        .ber_tiers
        .iter()
        .find(|t| t.matches(ber))
        .map_or(model.ber_floor_penalty_us, |t| t.penalty_us))
}

pub fn queuing_penalty(model: &RewardModel, load: f64) -> Result<f64> {
    check_load(load)?;
    Ok(model.service_time_us / (1.0 - load))
}

pub fn link_penalty(model: &RewardModel, distance_km: f64, tel: LinkTelemetry) -> Result<f64> {
    if !(distance_km >= 0.0) {
        return Err(Error::NegativeDistance { distance_km, index: 0 });
    }
    Ok(model.propagation_us_per_km * distance_km + queuing_penalty(model, tel.load)? + ber_penalty(model, tel.ber)?)
}

/// Penalty of a concrete link, honoring the capacity-derived service time
/// when the model enables it.
pub fn penalty_of_link(model: &RewardModel, link: &Link, tel: LinkTelemetry) -> Result<f64> {
    match model.packet_bits {
        None => link_penalty(model, link.distance_km, tel),
        Some(bits) => {
            let per_link = RewardModel {
                service_time_us: bits / link.capacity_bps * 1e6,
                ..model.clone()
            };
            link_penalty(&per_link, link.distance_km, tel)
        }
    }
}

/// Telemetry for every link of a topology at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetrySnapshot {
    entries: BTreeMap<(NodeId, NodeId), LinkTelemetry>,
    /// Seconds; advanced by applied events.
    pub timestamp: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TelemetryDoc {
    telemetry: Vec<TelemetryRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TelemetryRecord {
    a: u32,
    b: u32,
    load: f64,
    ber: f64,
}

impl TelemetrySnapshot {
    /// Same telemetry on every link of `topo`.
    pub fn uniform(topo: &Topology, load: f64, ber: f64) -> Result<Self> {
        let tel = LinkTelemetry::new(load, ber)?;
        Ok(TelemetrySnapshot {
            entries: topo.links().iter().map(|l| (l.key(), tel)).collect(),
            timestamp: 0.0,
        })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((NodeId, NodeId), LinkTelemetry)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, ((a, b), tel)) in entries.into_iter().enumerate() {
            LinkTelemetry::new(tel.load, tel.ber)?;
            let key = link_key(a, b);
            if map.insert(key, tel).is_some() {
                return Err(Error::DuplicateTelemetry {
                    a: key.0,
                    b: key.1,
                    index: i,
                });
            }
        }
        Ok(TelemetrySnapshot {
            entries: map,
            timestamp: 0.0,
        })
    }

    pub fn from_json(doc: &str) -> Result<Self> {
        let doc: TelemetryDoc = serde_json::from_str(doc)?;
        Self::from_entries(doc.telemetry.into_iter().map(|r| {
            (
                (NodeId(r.a), NodeId(r.b)),
                LinkTelemetry {
                    load: r.load,
                    ber: r.ber,
                },
            )
        }))
    }

    pub fn to_json(&self) -> String {
        let doc = TelemetryDoc {
            telemetry: self
                .entries
                .iter()
                .map(|(&(a, b), t)| TelemetryRecord {
                    a: a.0,
                    b: b.0,
                    load: t.load,
                    ber: t.ber,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("telemetry serializes")
    }

    pub fn get(&self, a: NodeId, b: NodeId) -> Option<LinkTelemetry> {
        self.entries.get(&link_key(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), LinkTelemetry)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Replaces one link's telemetry without touching the timestamp.
    pub fn with_link(&self, a: NodeId, b: NodeId, tel: LinkTelemetry) -> Result<Self> {
        let key = link_key(a, b);
        if !self.entries.contains_key(&key) {
            return Err(Error::UnknownLink(key.0, key.1));
        }
        LinkTelemetry::new(tel.load, tel.ber)?;
        let mut next = self.clone();
        next.entries.insert(key, tel);
        Ok(next)
    }

    /// Checks that the snapshot covers exactly the links of `topo`.
    pub fn check_covers(&self, topo: &Topology) -> Result<()> {
        for l in topo.links() {
            if !self.entries.contains_key(&l.key()) {
                return Err(Error::MissingTelemetry(l.endpoint_a, l.endpoint_b));
            }
        }
        if let Some((&(a, b), _)) = self.entries.iter().find(|(&(a, b), _)| topo.link_index(a, b).is_none()) {
            return Err(Error::UnknownLink(a, b));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventField {
    Load,
    Ber,
}

/// A single-field telemetry change on one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryEvent {
    #[serde(rename = "t")]
    pub time: f64,
    pub a: NodeId,
    pub b: NodeId,
    pub field: EventField,
    pub value: f64,
}

impl TelemetryEvent {
    pub fn new(time: f64, a: u32, b: u32, field: EventField, value: f64) -> Self {
        TelemetryEvent {
            time,
            a: NodeId(a),
            b: NodeId(b),
            field,
            value,
        }
    }
}

/// Returns a snapshot differing from `snap` only in the field named by the
/// event, with the timestamp moved to the event time.
pub fn apply_event(snap: &TelemetrySnapshot, ev: &TelemetryEvent) -> Result<TelemetrySnapshot> {
    if !(ev.time >= 0.0) || ev.time < snap.timestamp {
        return Err(Error::OutOfOrderEvent {
            time: ev.time,
            snapshot_time: snap.timestamp,
        });
    }
    let mut tel = snap.get(ev.a, ev.b).ok_or_else(|| {
        let (a, b) = link_key(ev.a, ev.b);
        Error::UnknownLink(a, b)
    })?;
    match ev.field {
        EventField::Load => {
            check_load(ev.value)?;
            tel.load = ev.value;
        }
        EventField::Ber => {
            check_ber(ev.value)?;
            tel.ber = ev.value;
        }
    }
    let mut next = snap.with_link(ev.a, ev.b, tel)?;
    next.timestamp = ev.time;
    Ok(next)
}

/// Parses a newline-delimited event stream. Blank lines and lines starting
/// with `#` are skipped; times must be non-decreasing.
pub fn parse_event_stream(text: &str) -> Result<Vec<TelemetryEvent>> {
    let mut events: Vec<TelemetryEvent> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ev: TelemetryEvent = serde_json::from_str(line).map_err(|e| Error::EventLine {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if let Some(prev) = events.last() {
            if ev.time < prev.time {
                return Err(Error::EventLine {
                    line: i + 1,
                    msg: "time goes backwards".into(),
                });
            }
        }
        events.push(ev);
    }
    Ok(events)
}

/// `R(s, a)` for every directed adjacency of a topology.
#[derive(Debug, Clone)]
pub struct RewardMatrix<'t> {
    topo: &'t Topology,
    link_penalty: Vec<f64>,
    hop_reward: Vec<f64>,
}

pub fn build_reward_matrix<'t>(
    topo: &'t Topology,
    snap: &TelemetrySnapshot,
    model: &RewardModel,
) -> Result<RewardMatrix<'t>> {
    model.validate()?;
    snap.check_covers(topo)?;
    let link_penalty = topo
        .links()
        .iter()
        .map(|l| {
            let tel = snap.get(l.endpoint_a, l.endpoint_b).expect("coverage checked");
            penalty_of_link(model, l, tel)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RewardMatrix::from_link_penalties(topo, link_penalty))
}

impl<'t> RewardMatrix<'t> {
    /// Builds a matrix from precomputed per-link penalties, in the
    /// topology's canonical link order.
    pub fn from_link_penalties(topo: &'t Topology, link_penalty: Vec<f64>) -> Self {
        assert_eq!(link_penalty.len(), topo.link_count(), "one penalty per link");
        let mut hop_reward = Vec::with_capacity(topo.hop_count());
        for i in 0..topo.node_count() {
            hop_reward.extend(topo.hops_of(i).iter().map(|h| -link_penalty[h.link]));
        }
        RewardMatrix {
            topo,
            link_penalty,
            hop_reward,
        }
    }

    pub fn topology(&self) -> &'t Topology {
        self.topo
    }

    /// `R(s, a)`, or `None` when `a` is not a neighbor of `s`.
    pub fn reward(&self, s: NodeId, a: NodeId) -> Option<f64> {
        let i = self.topo.index_of(s).ok()?;
        let j = self.topo.index_of(a).ok()?;
        self.topo.hop_index(i, j).map(|h| self.hop_reward[h])
    }

    /// Number of directed entries.
    pub fn len(&self) -> usize {
        self.hop_reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hop_reward.is_empty()
    }

    /// All entries as `(s, a, R(s,a))`, ordered by `s` then `a`.
    pub fn entries(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.topo.node_count() {
            let base = self.topo.hop_offset(i);
            for (k, h) in self.topo.hops_of(i).iter().enumerate() {
                out.push((self.topo.node_at(i), self.topo.node_at(h.to), self.hop_reward[base + k]));
            }
        }
        out
    }

    pub fn link_penalties(&self) -> &[f64] {
        &self.link_penalty
    }

    pub(crate) fn hop_rewards(&self) -> &[f64] {
        &self.hop_reward
    }
}
