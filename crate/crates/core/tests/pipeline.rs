mod support;

use proptest::prelude::*;
use qpattern::simulator::{CouplingKind, Simulator};
use qpattern::{
    bell_pairs, bipartition, build_pattern, random_chains, triplet_cover, ChipTopology, DeviceModel,
    GateDurations, PartitionInput, PatternSpec,
};

const SPECS: [&str; 12] = [
    "blank_one",
    "blank_plus",
    "checkerboard_one.A",
    "checkerboard_plus.A",
    "checkerboard_plus.B",
    "active.B.n4",
    "bell.phi+.dense",
    "bell.phi-.spaced",
    "triplet.cx",
    "triplet.delay",
    "ghz.L2",
    "ghz.L3",
];

fn joint_distribution(spec: PatternSpec, topo: &ChipTopology, dev: &DeviceModel, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let bp = bipartition(topo).unwrap();
    let cover = triplet_cover(topo);
    let pairs;
    let chains;
    let part = match spec {
        PatternSpec::BlankOne | PatternSpec::BlankPlusEchoed => PartitionInput::None,
        PatternSpec::Bell { layout, .. } => {
            pairs = bell_pairs(topo, layout);
            PartitionInput::Pairs(&pairs)
        }
        PatternSpec::TripletCollision { .. } => PartitionInput::Triplets(&cover),
        PatternSpec::GhzChain { chain_length } => {
            chains = random_chains(topo, chain_length, 1, 3).unwrap();
            PartitionInput::Chains(&chains)
        }
        _ => PartitionInput::Bipartition(&bp),
    };
    let c = build_pattern(&spec, topo, part, tau, &GateDurations::default()).unwrap();
    let sim = Simulator::new(dev, topo).unwrap();
    let ours = sim.outcome(&c).unwrap().distribution().unwrap();
    let oracle = support::DenseModel::new(dev, topo).probabilities(&c);
    (ours, oracle)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// The clustered simulator reproduces a whole-register Lindblad
    /// evolution on a three-qubit line.
    #[test]
    fn clustered_matches_dense_oracle(
        spec in 0..SPECS.len(),
        tau in 0.0f64..40.0,
        t1 in prop::collection::vec(20.0f64..200.0, 3),
        t2 in prop::collection::vec(20.0f64..200.0, 3),
        nu in prop::collection::vec(0.0f64..0.4, 2),
    ) {
        let topo = ChipTopology::path(3);
        let mut dev = DeviceModel::uniform(3, 1.0, 1.0)
            .with_coupling(0, 1, nu[0])
            .with_coupling(1, 2, nu[1]);
        for q in 0..3 {
            dev.qubits[q].t1_us = t1[q];
            dev.qubits[q].t2_us = t2[q];
        }
        let (ours, oracle) = joint_distribution(SPECS[spec].parse().unwrap(), &topo, &dev, tau);
        prop_assert!(max_diff(&ours, &oracle) < 1e-6, "{} {:?} {:?}", SPECS[spec], ours, oracle);
    }
}

#[test]
fn transverse_couplings_match_dense_oracle() {
    let topo = ChipTopology::path(3);
    for kind in [CouplingKind::Xx, CouplingKind::Yy] {
        let mut dev = DeviceModel::uniform(3, 60.0, 90.0).with_uniform_coupling(&topo, 0.3);
        dev.coupling_kind = kind;
        for spec in ["blank_one", "checkerboard_plus.A", "bell.phi+.dense"] {
            let (ours, oracle) = joint_distribution(spec.parse().unwrap(), &topo, &dev, 17.0);
            assert!(max_diff(&ours, &oracle) < 1e-6, "{kind:?} {spec}");
        }
    }
}

#[test]
fn star_oracle_agrees_with_echo_formula() {
    let topo = ChipTopology::star(2);
    let dev = DeviceModel::uniform(3, f64::INFINITY, 150.0)
        .with_coupling(0, 1, 0.2)
        .with_coupling(0, 2, 0.05);
    let model = support::DenseModel::new(&dev, &topo);
    for tau in [0.0, 3.0, 25.0, 60.0] {
        let c = build_pattern(&PatternSpec::BlankPlusEchoed, &topo, PartitionInput::None, tau, &GateDurations::default()).unwrap();
        let p = model.probabilities(&c);
        let f0 = support::zero_probability(&p, &[0]);
        assert!((f0 - support::echo_plus_fidelity(tau, 150.0, &[0.2, 0.05])).abs() < 1e-9);
    }
}
