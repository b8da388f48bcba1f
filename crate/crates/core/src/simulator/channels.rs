//! Non-Markovian extras: frequency-collision leakage and gate-induced heating.

use crate::analysis::collisions::{Collision, CollisionType};
use crate::circuit::{Circuit, GateKind};
use crate::topology::ChipTopology;

/// `T1 / (1 + kappa * x_rate)`, with `x_rate` in X gates per us.
pub fn heating_adjusted_t1(t1_us: f64, kappa: f64, x_rate_per_us: f64) -> f64 {
    t1_us / (1.0 + kappa * x_rate_per_us)
}

/// X gates per us played on spectator neighbors of `q` strictly inside the
/// idle window (0, tau).
pub fn spectator_x_rate(circuit: &Circuit, topo: &ChipTopology, q: usize) -> f64 {
    if circuit.tau_us <= 0.0 {
        return 0.0;
    }
    let window_ns = circuit.tau_us * 1000.0;
    let count = topo
        .neighbors(q)
        .iter()
        .filter(|n| circuit.spectators.contains(n))
        .flat_map(|&n| circuit.gates_on(n))
        .filter(|g| g.kind == GateKind::X && g.at_ns > 0.0 && g.at_ns < window_ns)
        .count();
    count as f64 / circuit.tau_us
}

/// Qubits forced to read 1 with probability `p_leak`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakEvent {
    pub qubits: Vec<usize>,
    pub p_leak: f64,
    pub collision: Collision,
}

/// Leak events triggered by the circuit: a CX drive on the flagged pair of a
/// collision triplet while its spectator end is held in |1> by X gates.
pub fn leak_events(circuit: &Circuit, flagged: &[Collision], p_leak: f64) -> Vec<LeakEvent> {
    if p_leak == 0.0 || flagged.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (k, g) in circuit.gates.iter().enumerate() {
        if g.kind != GateKind::Cx {
            continue;
        }
        let (b, c) = (g.qubits[0], g.qubits[1]);
        for col in flagged {
            let t = col.triplet;
            let excited = match col.kind {
                CollisionType::Type1 if t.b == b && t.c == c => Some(t.a),
                CollisionType::Type2 if t.b == b && t.c == c => Some(t.a),
                CollisionType::Type2 if t.b == b && t.a == c => Some(t.c),
                _ => None,
            };
            let Some(a) = excited else { continue };
            if !held_in_one(circuit, k, a) {
                continue;
            }
            let qubits = match col.kind {
                CollisionType::Type1 => vec![a],
                CollisionType::Type2 => vec![a, b],
            };
            out.push(LeakEvent {
                qubits,
                p_leak,
                collision: *col,
            });
        }
    }
    out
}

/// Whether `q` sits in |1> before gate `k`: only X gates so far, odd count.
fn held_in_one(circuit: &Circuit, k: usize, q: usize) -> bool {
    let mut ones = false;
    for g in circuit.gates[..k].iter().filter(|g| g.qubits.contains(&q)) {
        match g.kind {
            GateKind::X => ones = !ones,
            GateKind::Delay => {}
            _ => return false,
        }
    }
    ones
}

/// `P' = (1 - p) P + p P∘force`, where `force` sets every bit of `mask`.
pub fn apply_leak(dist: &mut [f64], mask: usize, p: f64) {
    let old = dist.to_vec();
    for (i, v) in dist.iter_mut().enumerate() {
        *v *= 1.0 - p;
        if i & mask == mask {
            // every source state collapsing onto i
            let free = !mask;
            *v += p * old
                .iter()
                .enumerate()
                .filter(|(j, _)| j & free == i & free)
                .map(|(_, w)| w)
                .sum::<f64>();
        }
    }
}

/// Per-bit readout confusion.
pub fn apply_readout(dist: &mut [f64], mask: usize, p10: f64, p01: f64) {
    if p10 == 0.0 && p01 == 0.0 {
        return;
    }
    for i0 in (0..dist.len()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let (a, b) = (dist[i0], dist[i1]);
        dist[i0] = (1.0 - p10) * a + p01 * b;
        dist[i1] = p10 * a + (1.0 - p01) * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Triplet;

    #[test]
    fn leak_moves_weight_onto_forced_bits() {
        let mut d = vec![0.5, 0.25, 0.125, 0.125];
        apply_leak(&mut d, 0b10, 0.4);
        let want = [0.3, 0.15, 0.075 + 0.4 * 0.625, 0.075 + 0.4 * 0.375];
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn readout_confusion() {
        let mut d = vec![1.0, 0.0];
        apply_readout(&mut d, 1, 0.1, 0.2);
        assert_eq!(d, vec![0.9, 0.1]);
        let mut d = vec![0.0, 1.0];
        apply_readout(&mut d, 1, 0.1, 0.2);
        assert_eq!(d, vec![0.2, 0.8]);
    }

    #[test]
    fn heating_formula() {
        assert_eq!(heating_adjusted_t1(100.0, 0.0, 5.0), 100.0);
        assert!((heating_adjusted_t1(100.0, 0.5, 2.0) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn leak_requires_excited_spectator() {
        use crate::circuit::Gate;
        let col = Collision {
            kind: CollisionType::Type1,
            triplet: Triplet::new(0, 1, 2),
            detuning_mhz: 1.0,
        };
        let mk = |gates| Circuit {
            pattern_id: "t".into(),
            num_qubits: 3,
            gates,
            tau_us: 0.5,
            target_groups: vec![],
            spectators: vec![],
        };
        let c = mk(vec![Gate::x(0, 0.0), Gate::cx(1, 2, 0.0), Gate::x(0, 500.0)]);
        assert_eq!(leak_events(&c, &[col], 0.3).len(), 1);
        let c = mk(vec![Gate::cx(1, 2, 0.0)]);
        assert!(leak_events(&c, &[col], 0.3).is_empty());
        let c = mk(vec![Gate::x(0, 0.0), Gate::cx(2, 1, 0.0)]);
        assert!(leak_events(&c, &[col], 0.3).is_empty());
    }
}
