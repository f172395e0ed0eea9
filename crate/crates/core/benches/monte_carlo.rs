use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qds_core::bounds::thresholds;
use qds_core::coherent::PhaseAlphabet;
use qds_core::sim::{run_experiment, BobStrategy, ProtocolConfig};
use qds_core::{ChannelModel, Execution};

fn config(execution: Execution) -> ProtocolConfig {
    let alphabet = PhaseAlphabet::from_mean_photons(8, 0.2).unwrap();
    let channel = ChannelModel { visibility: 0.95, ..ChannelModel::ideal() };
    let (s_a, s_v) = thresholds(4.99e-3, 0.0515).unwrap();
    let mut config = ProtocolConfig::new(alphabet, channel, s_a, s_v);
    config.signature_length = 10_000;
    config.trials = 64;
    config.bob = BobStrategy::PassiveForger;
    config.execution = execution;
    config
}

fn backends(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_experiment");
    group.sample_size(10);
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let cfg = config(execution);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_experiment(cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, backends);
criterion_main!(benches);
