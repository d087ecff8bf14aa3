mod common;

use std::sync::Arc;

use common::*;
use optiroute::engine::{revert_check, EngineConfig, EngineState, EventField, Solver, TelemetryEvent};
use optiroute::export::to_structured;
use optiroute::fixtures;
use optiroute::oracle::{verify_policy, WeightedView};
use optiroute::qlearning::Hyperparams;
use optiroute::telemetry::RewardModel;
use optiroute::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn engine(f: &fixtures::Fixture, solver: Solver) -> EngineState {
    EngineState::new(
        Arc::new(f.topology.clone()),
        f.nominal.clone(),
        EngineConfig::with_solver(solver),
    )
    .unwrap()
}

#[test]
fn eight_node_degradation_diffs() {
    let f = fixtures::eight_node();
    for solver in [Solver::Oracle, Solver::QLearning] {
        let mut st = engine(&f, solver);
        let out = st.replay(&f.events, 0.0);
        assert!(out.aborted.is_none());
        assert_eq!(out.steps.len(), 2);
        let mut changed: Vec<(u32, u32)> = out
            .steps
            .iter()
            .flat_map(|s| s.diff.entries.iter().map(|e| (e.src.0, e.dst.0)))
            .collect();
        changed.sort();
        changed.dedup();
        for (s, d) in CHANGED {
            assert!(changed.contains(&(s, d)), "{solver:?}: missing {s}->{d}");
        }
        let extra: Vec<_> = changed.iter().filter(|p| !CHANGED.contains(p)).collect();
        assert_eq!(extra, vec![&(1, 3), &(1, 7)]);
        assert_eq!(mismatches(&st.table(), &EIGHT_SECONDARY).len(), 2);

        let first = &out.steps[0].diff;
        assert_eq!(first.get(NodeId(3), NodeId(4)).unwrap().new.label(), "3-2-1-4");
        let second = &out.steps[1].diff;
        assert_eq!(second.get(NodeId(7), NodeId(8)).unwrap().new.label(), "7-6-5-2-1-4-8");
        assert!(out
            .steps
            .iter()
            .all(|s| s.diff.entries.iter().all(|e| e.old.label() != e.new.label())));
    }
}

#[test]
fn batched_replay_yields_one_cumulative_diff() {
    let f = fixtures::eight_node();
    let mut st = engine(&f, Solver::Oracle);
    let out = st.replay(&f.events, 5.0);
    assert_eq!(out.steps.len(), 1);
    assert_eq!(out.steps[0].diff.changed, 16);
}

#[test]
fn tokyo_degradation_stream() {
    let f = fixtures::tokyo();
    for solver in [Solver::Oracle, Solver::QLearning] {
        let mut st = engine(&f, solver);
        let out = st.replay(&f.events, 0.0);
        assert!(out.aborted.is_none());
        assert_eq!(out.steps.len(), 3);
        let table = st.table();
        for (s, d, _, _, secondary, reward) in TOKYO {
            let r = table.route(NodeId(s), NodeId(d)).unwrap();
            assert_eq!(r.display_path(), secondary);
            assert!((r.total_reward - reward).abs() <= 0.01);
        }
    }
}

#[test]
fn q_solver_stays_verified_after_quiescence() {
    let f = fixtures::eight_node();
    let mut st = engine(&f, Solver::QLearning);
    st.replay(&f.events, 0.0);
    let view = WeightedView::new(st.topology(), st.snapshot(), &RewardModel::default()).unwrap();
    assert!(verify_policy(&st.table(), &view).is_ok());
    assert_eq!(st.table_time(), st.snapshot().timestamp);
}

#[test]
fn revert_check_with_both_solvers() {
    let f = fixtures::eight_node();
    for solver in [Solver::Oracle, Solver::QLearning] {
        let before = engine(&f, solver);
        let mut after = before.clone();
        after
            .step(&TelemetryEvent::new(1.0, 3, 4, EventField::Ber, 1e-4))
            .unwrap();
        assert!(!revert_check(&before, &after));
        after
            .step(&TelemetryEvent::new(2.0, 3, 4, EventField::Ber, 1e-6))
            .unwrap();
        assert!(revert_check(&before, &after), "{solver:?}");
    }
}

#[test]
fn commuting_events_reach_same_table() {
    let f = fixtures::tokyo();
    let a = TelemetryEvent::new(1.0, 1, 6, EventField::Ber, 1e-4);
    let b = TelemetryEvent::new(1.0, 10, 11, EventField::Load, 0.7);
    let mut x = engine(&f, Solver::Oracle);
    let mut y = engine(&f, Solver::Oracle);
    x.step(&a).unwrap();
    x.step(&b).unwrap();
    y.step(&b).unwrap();
    y.step(&a).unwrap();
    assert!(x.table().same_routes(&y.table()));
}

#[test]
fn published_table_survives_later_steps() {
    let f = fixtures::eight_node();
    let mut st = engine(&f, Solver::Oracle);
    let held = st.table();
    let mut last = st.table_time();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let links: Vec<_> = f.topology.links().iter().map(|l| l.key()).collect();
    for k in 0..20 {
        let (a, b) = links[rng.random_range(0..links.len())];
        let ev = TelemetryEvent::new(k as f64, a.0, b.0, EventField::Load, rng.random_range(0.0..0.9));
        st.step(&ev).unwrap();
        assert!(st.table_time() >= last);
        last = st.table_time();
    }
    assert_eq!(held.len(), 56);
    assert_eq!(mismatches(&held, &EIGHT_PRIMARY), vec![]);
}

#[test]
fn seeded_q_replay_is_byte_identical() {
    let f = fixtures::eight_node();
    let hp = Hyperparams {
        seed: 7,
        ..Hyperparams::default()
    };
    let run = || {
        let config = EngineConfig {
            hyperparams: hp.clone(),
            ..EngineConfig::default()
        };
        let mut st = EngineState::new(Arc::new(f.topology.clone()), f.nominal.clone(), config).unwrap();
        let out = st.replay(&f.events, 0.0);
        (serde_json::to_string(&out.steps).unwrap(), to_structured(&st.table()))
    };
    assert_eq!(run(), run());
}
