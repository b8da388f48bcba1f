use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpattern::circuit::{build_pattern, PartitionInput, PatternSpec, Side};
use qpattern::runner::{run_suite, SuiteConfig};
use qpattern::simulator::Simulator;
use qpattern::topology::bipartition;
use qpattern::{ChipTopology, DeviceModel, ExecPolicy};

fn falcon() -> (ChipTopology, DeviceModel) {
    let file = qpattern::device_file::DeviceFile::parse(include_str!("../../../devices/falcon27.json")).unwrap();
    let topo = ChipTopology::from_device_file(&file).unwrap();
    let dev = DeviceModel::from_file(&file, &topo).unwrap();
    (topo, dev)
}

fn policies() -> Vec<(&'static str, ExecPolicy)> {
    let mut v = vec![("sequential", ExecPolicy::Sequential)];
    if ExecPolicy::parallel_available() {
        v.push(("parallel", ExecPolicy::Parallel));
    }
    v
}

fn cluster_simulation(c: &mut Criterion) {
    let (topo, dev) = falcon();
    let bp = bipartition(&topo).unwrap();
    let spec = PatternSpec::CheckerboardOneActive { side: Side::A, n_x_gates: 20 };
    let circuit = build_pattern(&spec, &topo, PartitionInput::Bipartition(&bp), 40.0, &dev.gate_durations).unwrap();
    let mut group = c.benchmark_group("falcon_active_pattern");
    group.sample_size(10);
    for (name, policy) in policies() {
        let sim = Simulator::new(&dev, &topo).unwrap().with_policy(policy);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sim.outcome(&circuit).unwrap())
        });
    }
    group.finish();
}

fn suite(c: &mut Criterion) {
    let (topo, dev) = falcon();
    let cfg = SuiteConfig {
        device: "unused".into(),
        patterns: ["blank_one", "checkerboard_one.A", "checkerboard_plus.B"]
            .iter()
            .map(|p| qpattern::circuit::PatternSpecId(p.parse().unwrap()))
            .collect(),
        tau_grid_us: Some(qpattern::runner::log_grid(1.0, 150.0, 8)),
        shots: 1000,
        seed: 1,
        output_dir: "unused".into(),
        map_tau_us: None,
    };
    let mut group = c.benchmark_group("falcon_suite");
    group.sample_size(10);
    for (name, policy) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_suite(&cfg, &dev, &topo, policy).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, cluster_simulation, suite);
criterion_main!(benches);
