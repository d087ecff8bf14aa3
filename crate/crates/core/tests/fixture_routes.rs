mod common;

use common::*;
use optiroute::fixtures;
use optiroute::oracle::{self, shortest_path, verify_policy, WeightedView};
use optiroute::qlearning::{self, Hyperparams};
use optiroute::telemetry::{build_reward_matrix, RewardModel};
use optiroute::{NodeId, Route, RouteEntry};

#[test]
fn eight_node_fixture_penalties() {
    let f = fixtures::eight_node();
    let r = build_reward_matrix(&f.topology, &f.nominal, &RewardModel::default()).unwrap();
    let expected = [40.0, 15.0, 30.0, 10.0, 30.0, 16.0, 30.0, 30.0, 50.0];
    for (got, want) in r.link_penalties().iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert_eq!(r.len(), 18);
    assert!(r.entries().iter().all(|e| e.2 < 0.0));
}

#[test]
fn oracle_reproduces_eight_node_primary() {
    let f = fixtures::eight_node();
    let view = WeightedView::new(&f.topology, &f.nominal, &RewardModel::default()).unwrap();
    let table = oracle::solve_all(&view);
    assert_eq!(table.len(), 56);
    assert_eq!(mismatches(&table, &EIGHT_PRIMARY), vec![]);

    let r = shortest_path(&view, NodeId(1), NodeId(7)).unwrap().unwrap();
    assert_eq!(r.display_path(), "1-4-8-7");
    assert!((r.total_reward + 81.0).abs() < 1e-9);
    // 4-1-2-5-6 (95) beats 4-8-7-6 (96).
    let r = shortest_path(&view, NodeId(4), NodeId(6)).unwrap().unwrap();
    assert!((r.total_reward + 95.0).abs() < 1e-9);
    assert!((view.path_reward(&parse_path("4-8-7-6")).unwrap() + 96.0).abs() < 1e-9);
    // 5-2-1-4-8 (81) beats 5-6-7-8 (110).
    let r = shortest_path(&view, NodeId(5), NodeId(8)).unwrap().unwrap();
    assert_eq!(r.display_path(), "5-2-1-4-8");
}

#[test]
fn oracle_secondary_matches_all_but_errata() {
    let f = fixtures::eight_node();
    let view = WeightedView::new(&f.topology, &f.degraded, &RewardModel::default()).unwrap();
    let table = oracle::solve_all(&view);
    let bad = mismatches(&table, &EIGHT_SECONDARY);
    let cells: Vec<(u32, u32, &str)> = bad.iter().map(|(s, d, got, _)| (*s, *d, got.as_str())).collect();
    assert_eq!(cells, ERRATA.to_vec());

    // Forcing the published cells in makes the verifier flag exactly them.
    let mut forced = table.clone();
    for (s, d, _) in ERRATA {
        let path = parse_path(EIGHT_SECONDARY[s as usize - 1][d as usize - 1]);
        let total_reward = view.path_reward(&path).unwrap();
        forced.insert(NodeId(s), NodeId(d), RouteEntry::Path(Route { path, total_reward }));
    }
    let rep = verify_policy(&forced, &view);
    let failed: Vec<(u32, u32)> = rep.failures.iter().map(|c| (c.src.0, c.dst.0)).collect();
    assert_eq!(failed, vec![(1, 3), (1, 7)]);
}

#[test]
fn qlearning_reproduces_eight_node_tables() {
    let f = fixtures::eight_node();
    let model = RewardModel::default();
    for (snap, expected, allowed) in [
        (&f.nominal, &EIGHT_PRIMARY, vec![]),
        (
            &f.degraded,
            &EIGHT_SECONDARY,
            ERRATA.iter().map(|e| (e.0, e.1)).collect(),
        ),
    ] {
        let r = build_reward_matrix(&f.topology, snap, &model).unwrap();
        let table = qlearning::solve_all(&r, &Hyperparams::default()).unwrap();
        let bad: Vec<(u32, u32)> = mismatches(&table, expected).iter().map(|m| (m.0, m.1)).collect();
        assert_eq!(bad, allowed);
        assert!(verify_policy(&table, &WeightedView::from_rewards(&r)).is_ok());
    }
}

#[test]
fn greedy_next_hop_from_one_towards_eight() {
    let f = fixtures::eight_node();
    let r = build_reward_matrix(&f.topology, &f.nominal, &RewardModel::default()).unwrap();
    let q = qlearning::train(&r, NodeId(8), &Hyperparams::default()).unwrap();
    let via2 = q.value(&f.topology, NodeId(1), NodeId(2)).unwrap();
    let via4 = q.value(&f.topology, NodeId(1), NodeId(4)).unwrap();
    assert!(via4 > via2);
}

#[test]
fn tokyo_primary_and_secondary() {
    let f = fixtures::tokyo();
    assert_eq!(f.topology.node_count(), 23);
    assert!(f.topology.is_connected());
    let model = RewardModel::default();
    for degraded in [false, true] {
        let snap = if degraded { &f.degraded } else { &f.nominal };
        let view = WeightedView::new(&f.topology, snap, &model).unwrap();
        let r = build_reward_matrix(&f.topology, snap, &model).unwrap();
        let oracle_table = oracle::solve_all(&view);
        let q_table = qlearning::solve_all(&r, &Hyperparams::default()).unwrap();
        assert_eq!(q_table.len(), 506);
        assert!(verify_policy(&q_table, &view).is_ok());
        for table in [&oracle_table, &q_table] {
            for (s, d, p, pr, sp, sr) in TOKYO {
                let (path, reward) = if degraded { (sp, sr) } else { (p, pr) };
                let route = table.route(NodeId(s), NodeId(d)).unwrap();
                assert_eq!(route.display_path(), path);
                assert!(
                    (route.total_reward - reward).abs() <= 0.01,
                    "{s}->{d}: {}",
                    route.total_reward
                );
            }
        }
    }
}
