use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use faraday_qns::optics::{MeasurementBasis, SensorConfig};
use faraday_qns::quantum::InitialState;
use faraday_qns::trajectory::{run_sequences_with, Target, TrajectoryConfig};
use faraday_qns::weak::{ProtocolSpec, ShotSpec};
use faraday_qns::{Execution, TargetModel};

fn config(sequences: usize) -> TrajectoryConfig {
    let model = TargetModel::ising_chain(3, 1.0, 0.7, 1.0, &InitialState::Thermal { beta: 1.0 }).unwrap();
    let shots = vec![ShotSpec::new(0.0, MeasurementBasis::S3), ShotSpec::new(0.8, MeasurementBasis::S2)];
    let proto = ProtocolSpec::new(shots, SensorConfig::new(10.0, 0.005).unwrap()).unwrap();
    TrajectoryConfig::new(sequences, 1, proto, Target::Quantum(model)).unwrap()
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("kraus_trajectories");
    group.sample_size(10);
    for sequences in [2_000, 20_000] {
        let cfg = config(sequences);
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, sequences), &cfg, |b, cfg| {
                b.iter(|| run_sequences_with(cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
