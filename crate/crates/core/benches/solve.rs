use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use optiroute::fixtures;
use optiroute::oracle::{self, WeightedView};
use optiroute::qlearning::{self, Hyperparams};
use optiroute::synth::random_network;
use optiroute::telemetry::{build_reward_matrix, RewardModel};
use optiroute::Execution;

fn tokyo_qlearning(c: &mut Criterion) {
    let f = fixtures::tokyo();
    let r = build_reward_matrix(&f.topology, &f.nominal, &RewardModel::default()).unwrap();
    let hp = Hyperparams::default();
    let mut g = c.benchmark_group("tokyo_q_solve");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| qlearning::solve_all_with(&r, &hp, None, exec).unwrap())
        });
    }
    g.finish();
}

fn oracle_sweep(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let nets: Vec<_> = (0..20).map(|_| random_network(30, 1.0, &mut rng)).collect();
    let model = RewardModel::default();
    let mut g = c.benchmark_group("oracle_random30");
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| {
                for (t, s) in &nets {
                    let v = WeightedView::new(t, s, &model).unwrap();
                    oracle::solve_all_with(&v, exec);
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, tokyo_qlearning, oracle_sweep);
criterion_main!(benches);
