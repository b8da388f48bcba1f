//! Lindblad density-matrix reference backend.
//!
//! A circuit is split into clusters of qubits that can become correlated;
//! every cluster is integrated independently from |0...0> and the joint
//! outcome distribution is the product of the cluster distributions.
//!
//! Qubits that never see a gate stay in |0> and only shift their neighbors'
//! frequencies, so their ZZ terms are folded into the neighbors as single-qubit
//! Z terms. Qubits that only see X gates stay diagonal and commute with every
//! ZZ term, so their couplings to other diagonal qubits can be dropped.

pub mod channels;
pub mod closed_form;
pub mod density;
pub mod device;
pub mod evolve;
pub mod sampling;

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use channels::{heating_adjusted_t1, LeakEvent};
pub use closed_form::closed_form_plus_fidelity;
pub use density::{
    build_coupling_hamiltonian, build_zz_hamiltonian, lindblad_rhs, ClusterState, CollapseKind,
    CollapseOp, Hamiltonian, Lindbladian,
};
pub use device::{CouplingKind, DeviceModel, QubitParams, DEFAULT_CLUSTER_CAP};
pub use evolve::{evolve, evolve_delay, schedule_for, EvolveStats, Step};
pub use sampling::CountsRecord;

use crate::analysis::collisions::{detect_collisions, Collision, CollisionThresholds};
use crate::circuit::{Circuit, GateKind, PatternSpec};
use crate::error::{Error, Result};
use crate::par::ExecPolicy;
use crate::topology::ChipTopology;

/// Outcome probabilities below this are treated as integration noise.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

const INVARIANT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitRole {
    /// No gates at all: stays in |0>.
    Frozen,
    /// Only X gates: stays diagonal.
    Classical,
    Quantum,
}

pub fn qubit_roles(circuit: &Circuit) -> Vec<QubitRole> {
    let mut roles = vec![QubitRole::Frozen; circuit.num_qubits];
    for g in &circuit.gates {
        let role = match g.kind {
            GateKind::X => QubitRole::Classical,
            GateKind::H | GateKind::Cx => QubitRole::Quantum,
            GateKind::Delay | GateKind::Measure => continue,
        };
        for &q in &g.qubits {
            if role == QubitRole::Quantum || roles[q] == QubitRole::Frozen {
                roles[q] = role;
            }
        }
    }
    roles
}

/// Groups qubits that must be simulated jointly: CX partners, `extra_pairs`,
/// and coupled pairs whose interaction can build correlations (for ZZ: both
/// ends active and at least one of them in superposition).
pub fn partition_into_clusters(
    circuit: &Circuit,
    device: &DeviceModel,
    extra_pairs: &[(usize, usize)],
) -> Result<Vec<Vec<usize>>> {
    let n = circuit.num_qubits;
    let roles = qubit_roles(circuit);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for g in circuit.gates.iter().filter(|g| g.kind == GateKind::Cx) {
        union(g.qubits[0], g.qubits[1]);
    }
    for (&(i, j), &w) in &device.couplings {
        if w == 0.0 || i >= n || j >= n {
            continue;
        }
        let join = match device.coupling_kind {
            CouplingKind::Zz => {
                roles[i] != QubitRole::Frozen
                    && roles[j] != QubitRole::Frozen
                    && (roles[i] == QubitRole::Quantum || roles[j] == QubitRole::Quantum)
            }
            _ => true,
        };
        if join {
            union(i, j);
        }
    }
    for &(a, b) in extra_pairs {
        union(a, b);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for q in 0..n {
        groups.entry(find(&mut parent, q)).or_default().push(q);
    }
    let clusters: Vec<Vec<usize>> = groups.into_values().collect();
    if let Some(big) = clusters.iter().find(|c| c.len() > device.cluster_cap) {
        return Err(Error::ClusterTooLarge {
            qubits: big.clone(),
            cap: device.cluster_cap,
        });
    }
    Ok(clusters)
}

/// Measured-outcome distribution of one cluster, after leakage and readout
/// error. Bit `k` of the index belongs to `qubits[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDistribution {
    pub qubits: Vec<usize>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub num_qubits: usize,
    pub clusters: Vec<ClusterDistribution>,
    pub leak_events: Vec<LeakEvent>,
    pub rk4_steps: usize,
    pub max_trace_drift: f64,
}

impl Outcome {
    /// Exact probability that every qubit of `group` reads 0.
    pub fn zero_probability(&self, group: &[usize]) -> f64 {
        self.clusters
            .iter()
            .map(|c| {
                let mask: usize = c
                    .qubits
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| group.contains(q))
                    .map(|(k, _)| 1 << k)
                    .sum();
                if mask == 0 {
                    1.0
                } else {
                    c.probs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i & mask == 0)
                        .map(|(_, p)| p)
                        .sum()
                }
            })
            .product()
    }

    /// Full joint distribution indexed by `sum_q bit_q << q`; small devices only.
    pub fn distribution(&self) -> Result<Vec<f64>> {
        if self.num_qubits > 20 {
            return Err(Error::field("num_qubits", "joint distribution limited to 20 qubits"));
        }
        let mut dist = vec![1.0; 1 << self.num_qubits];
        for (idx, v) in dist.iter_mut().enumerate() {
            for c in &self.clusters {
                let local: usize = c
                    .qubits
                    .iter()
                    .enumerate()
                    .filter(|(_, &q)| idx >> q & 1 == 1)
                    .map(|(k, _)| 1 << k)
                    .sum();
                *v *= c.probs[local];
            }
        }
        Ok(dist)
    }

    /// Draws `shots` bitstrings (qubit 0 rightmost).
    pub fn sample(&self, shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samplers = self
            .clusters
            .iter()
            .map(|c| WeightedIndex::new(&c.probs))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Numerical(format!("outcome distribution: {e}")))?;
        let n = self.num_qubits;
        let mut hist: HashMap<Vec<u8>, u64> = HashMap::new();
        for _ in 0..shots {
            let mut bits = vec![b'0'; n];
            for (c, s) in self.clusters.iter().zip(&samplers) {
                let idx = s.sample(&mut rng);
                for (k, &q) in c.qubits.iter().enumerate() {
                    if idx >> k & 1 == 1 {
                        bits[n - 1 - q] = b'1';
                    }
                }
            }
            *hist.entry(bits).or_default() += 1;
        }
        Ok(hist
            .into_iter()
            .map(|(k, v)| (String::from_utf8(k).expect("ascii"), v))
            .collect())
    }
}

/// Circuit executor bound to a device.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    device: &'a DeviceModel,
    topo: &'a ChipTopology,
    flagged: Vec<Collision>,
    policy: ExecPolicy,
}

impl<'a> Simulator<'a> {
    /// Collision triplets are taken from the detector with default
    /// thresholds when the device has frequency data and a nonzero leak.
    pub fn new(device: &'a DeviceModel, topo: &'a ChipTopology) -> Result<Self> {
        if device.num_qubits() != topo.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: topo.num_qubits(),
                found: device.num_qubits(),
            });
        }
        let flagged = if device.collision_p_leak > 0.0 {
            match detect_collisions(device, topo, &CollisionThresholds::default()) {
                Ok(report) => report.collisions,
                Err(Error::MissingFrequency(_)) => Vec::new(),
                Err(e) => return Err(e),
            }
        } else {
            Vec::new()
        };
        Ok(Simulator {
            device,
            topo,
            flagged,
            policy: ExecPolicy::default(),
        })
    }

    pub fn with_flagged(mut self, flagged: Vec<Collision>) -> Self {
        self.flagged = flagged;
        self
    }

    pub fn with_policy(mut self, policy: ExecPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn flagged(&self) -> &[Collision] {
        &self.flagged
    }

    pub fn outcome(&self, circuit: &Circuit) -> Result<Outcome> {
        circuit.validate()?;
        let n = self.topo.num_qubits();
        if circuit.num_qubits != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: circuit.num_qubits,
            });
        }
        if circuit.measured_qubits() != (0..n).collect::<Vec<_>>() {
            return Err(Error::field("gates", "every qubit must be measured"));
        }
        let leaks = channels::leak_events(circuit, &self.flagged, self.device.collision_p_leak);
        let pairs: Vec<(usize, usize)> = leaks
            .iter()
            .filter(|e| e.qubits.len() == 2)
            .map(|e| (e.qubits[0], e.qubits[1]))
            .collect();
        let clusters = partition_into_clusters(circuit, self.device, &pairs)?;
        let roles = qubit_roles(circuit);
        let results = self
            .policy
            .try_map(&clusters, |c| self.simulate_cluster(circuit, c, &roles, &leaks))?;
        let mut out = Outcome {
            num_qubits: n,
            clusters: Vec::with_capacity(results.len()),
            leak_events: leaks,
            rk4_steps: 0,
            max_trace_drift: 0.0,
        };
        for (dist, stats) in results {
            out.clusters.push(dist);
            out.rk4_steps += stats.rk4_steps;
            out.max_trace_drift = out.max_trace_drift.max(stats.max_trace_drift);
        }
        Ok(out)
    }

    pub fn run(&self, circuit: &Circuit, shots: u64, seed: u64) -> Result<CountsRecord> {
        let histogram = self.outcome(circuit)?.sample(shots, seed)?;
        let variant = circuit
            .pattern_id
            .parse::<PatternSpec>()
            .map(|s| s.variant_name().to_string())
            .unwrap_or_else(|_| circuit.pattern_id.clone());
        Ok(CountsRecord {
            pattern_id: circuit.pattern_id.clone(),
            variant,
            tau_us: circuit.tau_us,
            shots,
            seed,
            histogram,
        })
    }

    fn simulate_cluster(
        &self,
        circuit: &Circuit,
        cluster: &[usize],
        roles: &[QubitRole],
        leaks: &[LeakEvent],
    ) -> Result<(ClusterDistribution, EvolveStats)> {
        let dev = self.device;
        let d = 1usize << cluster.len();
        let all_frozen = cluster.iter().all(|&q| roles[q] == QubitRole::Frozen);
        let (mut probs, stats) = if all_frozen && dev.coupling_kind == CouplingKind::Zz {
            let mut p = vec![0.0; d];
            p[0] = 1.0;
            (p, EvolveStats::default())
        } else {
            let mut frozen: Vec<usize> = cluster
                .iter()
                .filter(|&&q| roles[q] == QubitRole::Quantum)
                .flat_map(|&q| self.topo.neighbors(q).iter().copied())
                .filter(|f| roles[*f] == QubitRole::Frozen && !cluster.contains(f))
                .collect();
            frozen.sort_unstable();
            frozen.dedup();
            let h = build_coupling_hamiltonian(dev, cluster, &frozen);
            let mut ops = Vec::new();
            for &q in cluster {
                let p = dev.qubits[q];
                let mut t1 = p.t1_us;
                if dev.heating_kappa > 0.0 && !circuit.spectators.contains(&q) {
                    let rate = channels::spectator_x_rate(circuit, self.topo, q);
                    t1 = heating_adjusted_t1(t1, dev.heating_kappa, rate);
                }
                ops.extend(CollapseOp::relaxation(q, t1));
                ops.extend(CollapseOp::dephasing(q, p.t2_us));
            }
            let l = Lindbladian::new(cluster, &h, &ops)?;
            let mut state = ClusterState::ground(cluster.to_vec());
            let stats = evolve(&mut state, &schedule_for(circuit, cluster), &l)?;
            if d <= 64 {
                state.check_invariants(INVARIANT_TOLERANCE)?;
            }
            (state.probabilities(), stats)
        };
        if probs.iter().any(|p| !p.is_finite() || *p < -INVARIANT_TOLERANCE) {
            return Err(Error::Numerical(format!("invalid outcome probabilities in cluster {cluster:?}")));
        }
        for p in probs.iter_mut() {
            if *p < PROBABILITY_FLOOR {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let mask_of = |qs: &[usize]| -> Option<usize> {
            qs.iter()
                .map(|q| cluster.iter().position(|c| c == q).map(|k| 1usize << k))
                .sum()
        };
        for ev in leaks {
            if let Some(m) = mask_of(&ev.qubits) {
                channels::apply_leak(&mut probs, m, ev.p_leak);
            }
        }
        for (k, &q) in cluster.iter().enumerate() {
            let p = dev.qubits[q];
            channels::apply_readout(&mut probs, 1 << k, p.p10, p.p01);
        }
        Ok((
            ClusterDistribution {
                qubits: cluster.to_vec(),
                probs,
            },
            stats,
        ))
    }
}

/// Executes `circuit` for `shots` shots with a deterministic RNG stream.
pub fn run_circuit(
    circuit: &Circuit,
    device: &DeviceModel,
    topo: &ChipTopology,
    shots: u64,
    seed: u64,
) -> Result<CountsRecord> {
    Simulator::new(device, topo)?.run(circuit, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_pattern, GateDurations, PartitionInput, Side};
    use crate::topology::bipartition;

    fn falcon() -> (ChipTopology, DeviceModel) {
        let file = crate::device_file::DeviceFile::parse(include_str!("../../../../devices/falcon27.json")).unwrap();
        let topo = ChipTopology::from_device_file(&file).unwrap();
        let dev = DeviceModel::from_file(&file, &topo).unwrap();
        (topo, dev)
    }

    #[test]
    fn blank_one_decays_as_t1() {
        let (topo, dev) = falcon();
        let c = build_pattern(&PatternSpec::BlankOne, &topo, PartitionInput::None, 20.0, &GateDurations::default()).unwrap();
        let out = Simulator::new(&dev, &topo).unwrap().outcome(&c).unwrap();
        assert_eq!(out.clusters.len(), 27);
        for q in 0..27 {
            let want = (-20.0 / dev.qubits[q].t1_us).exp();
            assert!((out.zero_probability(&[q]) - want).abs() < 1e-9, "qubit {q}");
        }
    }

    #[test]
    fn clusters_follow_roles() {
        let (topo, dev) = falcon();
        let bp = bipartition(&topo).unwrap();
        let spec = PatternSpec::CheckerboardPlusEchoed { side: Side::A };
        let c = build_pattern(&spec, &topo, PartitionInput::Bipartition(&bp), 5.0, &GateDurations::default()).unwrap();
        let clusters = partition_into_clusters(&c, &dev, &[]).unwrap();
        assert!(clusters.iter().all(|c| c.len() == 1));
        let c = build_pattern(&PatternSpec::BlankPlusEchoed, &topo, PartitionInput::None, 5.0, &GateDurations::default()).unwrap();
        assert!(matches!(
            partition_into_clusters(&c, &dev, &[]),
            Err(Error::ClusterTooLarge { cap: 10, .. })
        ));
        let clusters = partition_into_clusters(&c, &DeviceModel::uniform(27, 1.0, 1.0), &[(3, 4)]).unwrap();
        assert_eq!(clusters.len(), 26);
        assert!(clusters.contains(&vec![3, 4]));
    }

    #[test]
    fn noiseless_zero_delay_is_perfect() {
        let topo = ChipTopology::path(3);
        let dev = DeviceModel::noiseless(3);
        let c = build_pattern(&PatternSpec::BlankPlusEchoed, &topo, PartitionInput::None, 0.0, &GateDurations::default()).unwrap();
        let r = run_circuit(&c, &dev, &topo, 100, 5).unwrap();
        assert_eq!(r.histogram, BTreeMap::from([("000".to_string(), 100)]));
        assert_eq!(r.variant, "BLANK_PLUS_ECHOED");
    }

    #[test]
    fn sampling_is_deterministic_and_complete() {
        let topo = ChipTopology::path(2);
        let dev = DeviceModel::uniform(2, 10.0, 20.0);
        let c = build_pattern(&PatternSpec::BlankOne, &topo, PartitionInput::None, 10.0, &GateDurations::default()).unwrap();
        let a = run_circuit(&c, &dev, &topo, 1000, 42).unwrap();
        let b = run_circuit(&c, &dev, &topo, 1000, 42).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let seq = Simulator::new(&dev, &topo).unwrap().with_policy(ExecPolicy::Sequential).run(&c, 1000, 42).unwrap();
        assert_eq!(a, seq);
    }

    #[test]
    fn distribution_matches_zero_probability() {
        let topo = ChipTopology::path(3);
        let dev = DeviceModel::uniform(3, 30.0, 40.0).with_uniform_coupling(&topo, 0.2);
        let c = build_pattern(&PatternSpec::BlankPlusEchoed, &topo, PartitionInput::None, 3.0, &GateDurations::default()).unwrap();
        let out = Simulator::new(&dev, &topo).unwrap().outcome(&c).unwrap();
        let dist = out.distribution().unwrap();
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p0: f64 = dist.iter().step_by(2).sum();
        assert!((p0 - out.zero_probability(&[0])).abs() < 1e-12);
    }
}
