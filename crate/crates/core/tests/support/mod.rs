//! Reference models written against nalgebra, sharing no code with the
//! simulator: a full-register Liouvillian propagated with the matrix
//! exponential, and the textbook echo formulas.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use qpattern::circuit::GateKind;
use qpattern::simulator::CouplingKind;
use qpattern::{ChipTopology, Circuit, DeviceModel};

pub type M = DMatrix<C>;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// `(1 + exp(-tau/T2) prod cos(4 pi nu_i tau)) / 2` with `nu` in MHz.
pub fn echo_plus_fidelity(tau_us: f64, t2_us: f64, nu_mhz: &[f64]) -> f64 {
    let mut c = 1.0;
    for nu in nu_mhz {
        c *= (4.0 * PI * nu * tau_us).cos();
    }
    0.5 * (1.0 + (-tau_us / t2_us).exp() * c)
}

/// Embeds a single-qubit operator `[[a, b], [c, d]]` on `q` of an `n`-qubit
/// register (bit `q` of the basis index).
pub fn single(n: usize, q: usize, op: [[C; 2]; 2]) -> M {
    let d = 1 << n;
    M::from_fn(d, d, |r, c| {
        if (r ^ c) & !(1 << q) != 0 {
            return ZERO;
        }
        op[r >> q & 1][c >> q & 1]
    })
}

pub fn pauli_x() -> [[C; 2]; 2] {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> [[C; 2]; 2] {
    [[ZERO, -I], [I, ZERO]]
}

pub fn pauli_z() -> [[C; 2]; 2] {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub fn lowering() -> [[C; 2]; 2] {
    [[ZERO, ONE], [ZERO, ZERO]]
}

fn hadamard() -> [[C; 2]; 2] {
    let s = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

fn cnot(n: usize, control: usize, target: usize) -> M {
    let d = 1 << n;
    M::from_fn(d, d, |r, c| {
        let image = if c >> control & 1 == 1 { c ^ (1 << target) } else { c };
        if r == image {
            ONE
        } else {
            ZERO
        }
    })
}

/// Whole-device open-system model.
pub struct DenseModel {
    pub n: usize,
    pub h: M,
    pub jumps: Vec<M>,
}

impl DenseModel {
    pub fn new(device: &DeviceModel, topo: &ChipTopology) -> Self {
        let n = topo.num_qubits();
        let d = 1 << n;
        let p = match device.coupling_kind {
            CouplingKind::Zz => pauli_z(),
            CouplingKind::Xx => pauli_x(),
            CouplingKind::Yy => pauli_y(),
        };
        let mut h = M::zeros(d, d);
        for (&(a, b), &nu) in &device.couplings {
            let w = C::new(2.0 * PI * nu, 0.0);
            h += (single(n, a, p) * single(n, b, p)) * w;
        }
        let mut jumps = Vec::new();
        for (q, params) in device.qubits.iter().enumerate() {
            if params.t1_us.is_finite() {
                jumps.push(single(n, q, lowering()) * C::new((1.0 / params.t1_us).sqrt(), 0.0));
            }
            if params.t2_us.is_finite() {
                jumps.push(single(n, q, pauli_z()) * C::new((0.5 / params.t2_us).sqrt(), 0.0));
            }
        }
        DenseModel { n, h, jumps }
    }

    /// Generator acting on column-stacked density matrices,
    /// using `vec(A X B) = (B^T kron A) vec(X)`.
    pub fn liouvillian(&self) -> M {
        let d = 1 << self.n;
        let id = M::identity(d, d);
        let mut l = (id.kronecker(&self.h) - self.h.transpose().kronecker(&id)) * (-I);
        for j in &self.jumps {
            let jd_j = j.adjoint() * j;
            l += j.conjugate().kronecker(j);
            l -= id.kronecker(&jd_j) * C::new(0.5, 0.0);
            l -= jd_j.transpose().kronecker(&id) * C::new(0.5, 0.0);
        }
        l
    }

    /// Gate unitary on the full register.
    pub fn gate_unitary(&self, kind: GateKind, qubits: &[usize]) -> Option<M> {
        Some(match kind {
            GateKind::X => single(self.n, qubits[0], pauli_x()),
            GateKind::H => single(self.n, qubits[0], hadamard()),
            GateKind::Cx => cnot(self.n, qubits[0], qubits[1]),
            GateKind::Delay | GateKind::Measure => return None,
        })
    }

    /// Final density matrix of `circuit` from |0...0>: gates are instantaneous
    /// and the register evolves under the Liouvillian between them.
    pub fn final_state(&self, circuit: &Circuit) -> M {
        let d = 1 << self.n;
        let l = self.liouvillian();
        let mut rho = M::zeros(d, d);
        rho[(0, 0)] = ONE;
        let mut gates: Vec<_> = circuit.gates.iter().filter(|g| g.kind.is_unitary()).collect();
        gates.sort_by(|a, b| a.at_ns.total_cmp(&b.at_ns));
        let mut now = 0.0;
        let advance = |rho: &mut M, to_ns: f64, now: &mut f64| {
            let dt = (to_ns - *now) / 1000.0;
            if dt > 0.0 {
                *rho = propagate(&l, rho, dt);
                *now = to_ns;
            }
        };
        for g in gates {
            advance(&mut rho, g.at_ns, &mut now);
            let u = self.gate_unitary(g.kind, &g.qubits).expect("unitary gate");
            rho = &u * &rho * u.adjoint();
        }
        advance(&mut rho, circuit.duration_ns(), &mut now);
        rho
    }

    /// Diagonal of the final state, indexed by `sum_q bit_q << q`.
    pub fn probabilities(&self, circuit: &Circuit) -> Vec<f64> {
        let rho = self.final_state(circuit);
        (0..rho.nrows()).map(|i| rho[(i, i)].re).collect()
    }
}

/// `exp(L t) vec(rho)`.
pub fn propagate(l: &M, rho: &M, t_us: f64) -> M {
    let d = rho.nrows();
    let v = M::from_column_slice(d * d, 1, rho.as_slice());
    let out = (l * C::new(t_us, 0.0)).exp() * v;
    M::from_column_slice(d, d, out.as_slice())
}

/// Probability that every qubit in `group` reads 0.
pub fn zero_probability(probs: &[f64], group: &[usize]) -> f64 {
    let mask: usize = group.iter().map(|q| 1 << q).sum();
    probs.iter().enumerate().filter(|(i, _)| i & mask == 0).map(|(_, p)| p).sum()
}
