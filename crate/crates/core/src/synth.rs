//! Random connected networks with random telemetry, for property tests and
//! benchmarks.

use rand::Rng;

use crate::telemetry::{LinkTelemetry, TelemetrySnapshot};
use crate::topology::{Link, NodeId, Topology};

/// Draws a BER from one of the three default penalty tiers, chosen
/// uniformly: clean (at most 1e-5), marginal (1e-5, 1e-4), degraded (1e-4
/// and above).
pub fn random_ber<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..3) {
        0 => 10f64.powf(rng.random_range(-9.0..-5.0)),
        1 => rng.random_range(1.1e-5..9.9e-5),
        _ => 10f64.powf(rng.random_range(-4.0..-2.0)),
    }
}

/// A connected graph on `n` nodes: a random spanning tree plus about
/// `extra_per_node * n` additional links. Distances are uniform in
/// [1, 100) km, loads uniform in [0, 0.9], BER tiers uniform.
pub fn random_network<R: Rng>(n: usize, extra_per_node: f64, rng: &mut R) -> (Topology, TelemetrySnapshot) {
    assert!(n >= 1);
    let id = |i: usize| NodeId(i as u32 + 1);
    let mut pairs = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        pairs.insert((j, i));
    }
    let target = pairs.len() + (extra_per_node * n as f64).round() as usize;
    let max_links = n * (n - 1) / 2;
    while pairs.len() < target.min(max_links) {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let links: Vec<Link> = pairs
        .iter()
        .map(|&(a, b)| Link::new(id(a), id(b), rng.random_range(1.0..100.0)))
        .collect();
    let tel: Vec<_> = links
        .iter()
        .map(|l| {
            let t = LinkTelemetry {
                load: rng.random_range(0.0..=0.9),
                ber: random_ber(rng),
            };
            (l.key(), t)
        })
        .collect();
    let topo = Topology::new((0..n).map(id).collect(), links).expect("generated graph is valid");
    let snap = TelemetrySnapshot::from_entries(tel).expect("generated telemetry is valid");
    (topo, snap)
}
