//! Cluster density matrices, gate application and the Lindblad generator.
//!
//! Qubit `qubits[k]` of a cluster owns bit `k` of the basis index.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::Array2;
use num_complex::Complex64;

use super::device::{CouplingKind, DeviceModel};
use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    qubits: Vec<usize>,
    rho: Array2<Complex64>,
}

impl ClusterState {
    /// All qubits in |0>.
    pub fn ground(qubits: Vec<usize>) -> Self {
        let d = 1usize << qubits.len();
        let mut rho = Array2::zeros((d, d));
        rho[[0, 0]] = ONE;
        ClusterState { qubits, rho }
    }

    pub fn from_matrix(qubits: Vec<usize>, rho: Array2<Complex64>) -> Result<Self> {
        let d = 1usize << qubits.len();
        if rho.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        Ok(ClusterState {
            qubits,
            rho: rho.as_standard_layout().into_owned(),
        })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn rho(&self) -> &Array2<Complex64> {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub(crate) fn data(&self) -> &[Complex64] {
        self.rho.as_slice().expect("standard layout")
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        self.rho.as_slice_mut().expect("standard layout")
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.diag().sum()
    }

    /// Bit mask of `qubit` inside this cluster.
    pub fn mask_of(&self, qubit: usize) -> Result<usize> {
        self.qubits
            .iter()
            .position(|&q| q == qubit)
            .map(|k| 1 << k)
            .ok_or_else(|| Error::QubitOutsideCluster {
                qubit,
                cluster: self.qubits.clone(),
            })
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate.kind {
            GateKind::X => {
                let m = self.mask_of(gate.qubits[0])?;
                self.permute(|i| i ^ m);
            }
            GateKind::Cx => {
                let c = self.mask_of(gate.qubits[0])?;
                let t = self.mask_of(gate.qubits[1])?;
                self.permute(|i| if i & c != 0 { i ^ t } else { i });
            }
            GateKind::H => {
                let m = self.mask_of(gate.qubits[0])?;
                self.hadamard(m);
            }
            GateKind::Delay | GateKind::Measure => {
                return Err(Error::UnsupportedGate(gate.kind.name().to_string()))
            }
        }
        Ok(())
    }

    /// `rho' = P rho P^T` for an involutive basis permutation.
    fn permute(&mut self, p: impl Fn(usize) -> usize) {
        let d = self.dim();
        let old = self.data().to_vec();
        let new = self.data_mut();
        for i in 0..d {
            let pi = p(i);
            for j in 0..d {
                new[i * d + j] = old[pi * d + p(j)];
            }
        }
    }

    fn hadamard(&mut self, m: usize) {
        let d = self.dim();
        let s = FRAC_1_SQRT_2;
        let rho = self.data_mut();
        for i0 in (0..d).filter(|i| i & m == 0) {
            let i1 = i0 | m;
            for j in 0..d {
                let a = rho[i0 * d + j];
                let b = rho[i1 * d + j];
                rho[i0 * d + j] = (a + b) * s;
                rho[i1 * d + j] = (a - b) * s;
            }
        }
        for i in 0..d {
            for j0 in (0..d).filter(|j| j & m == 0) {
                let j1 = j0 | m;
                let a = rho[i * d + j0];
                let b = rho[i * d + j1];
                rho[i * d + j0] = (a + b) * s;
                rho[i * d + j1] = (a - b) * s;
            }
        }
    }

    /// Computational-basis probabilities (the diagonal, real part).
    pub fn probabilities(&self) -> Vec<f64> {
        self.rho.diag().iter().map(|z| z.re).collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (i..d).all(|j| (self.rho[[i, j]] - self.rho[[j, i]].conj()).norm() <= tol))
    }

    /// Cholesky test on `rho + tol * I`: succeeds iff the smallest eigenvalue
    /// of the Hermitian part is above `-tol` (up to rounding).
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut l = vec![ZERO; d * d];
        for j in 0..d {
            let mut diag = self.rho[[j, j]].re + tol;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if !(diag > 0.0) {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..d {
                let mut v = 0.5 * (self.rho[[i, j]] + self.rho[[j, i]].conj());
                for k in 0..j {
                    v -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = v / ljj;
            }
        }
        true
    }

    /// Unit trace, Hermitian, positive semidefinite.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::Numerical(format!("trace drifted to {tr}")));
        }
        if !self.is_hermitian(tol) {
            return Err(Error::Numerical("density matrix lost hermiticity".into()));
        }
        if !self.is_positive_semidefinite(tol) {
            return Err(Error::Numerical("density matrix has a negative eigenvalue".into()));
        }
        Ok(())
    }

    pub(crate) fn renormalize(&mut self) -> f64 {
        let tr = self.trace().re;
        let drift = (tr - 1.0).abs();
        if drift > 1e-9 && tr > 0.0 {
            self.rho.mapv_inplace(|z| z / tr);
        }
        drift
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    /// Energies of the computational basis states, in rad/us.
    Diagonal(Vec<f64>),
    Dense(Array2<Complex64>),
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Diagonal(h) => h.len(),
            Hamiltonian::Dense(h) => h.nrows(),
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        match self {
            Hamiltonian::Diagonal(h) => Array2::from_diag(&h.iter().map(|&e| Complex64::new(e, 0.0)).collect::<ndarray::Array1<_>>()),
            Hamiltonian::Dense(h) => h.clone(),
        }
    }

    /// Upper bound on the largest transition frequency.
    pub fn spread(&self) -> f64 {
        match self {
            Hamiltonian::Diagonal(h) => {
                let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = h.iter().copied().fold(f64::INFINITY, f64::min);
                if h.is_empty() { 0.0 } else { max - min }
            }
            Hamiltonian::Dense(h) => {
                2.0 * h
                    .rows()
                    .into_iter()
                    .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            }
        }
    }
}

fn z_sign(i: usize, m: usize) -> f64 {
    if i & m == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `sum Omega_ij Z_i Z_j` over coupled pairs inside `cluster`, plus
/// `Omega_qf Z_q` for every coupling to a qubit in `frozen_neighbors`, which
/// sit in |0> (eigenvalue +1) for the whole circuit.
pub fn build_zz_hamiltonian(
    device: &DeviceModel,
    cluster: &[usize],
    frozen_neighbors: &[usize],
) -> Hamiltonian {
    let d = 1usize << cluster.len();
    let mut h = vec![0.0; d];
    for (p, &qp) in cluster.iter().enumerate() {
        for (q, &qq) in cluster.iter().enumerate().skip(p + 1) {
            let w = device.omega_zz(qp, qq);
            if w != 0.0 {
                for (i, e) in h.iter_mut().enumerate() {
                    *e += w * z_sign(i, 1 << p) * z_sign(i, 1 << q);
                }
            }
        }
        for &f in frozen_neighbors {
            let w = device.omega_zz(qp, f);
            if w != 0.0 && !cluster.contains(&f) {
                for (i, e) in h.iter_mut().enumerate() {
                    *e += w * z_sign(i, 1 << p);
                }
            }
        }
    }
    Hamiltonian::Diagonal(h)
}

/// Coupling Hamiltonian of the device's [`CouplingKind`]. For XX and YY the
/// frozen-neighbor reduction does not hold and `frozen_neighbors` is ignored.
pub fn build_coupling_hamiltonian(
    device: &DeviceModel,
    cluster: &[usize],
    frozen_neighbors: &[usize],
) -> Hamiltonian {
    let kind = device.coupling_kind;
    if kind == CouplingKind::Zz {
        return build_zz_hamiltonian(device, cluster, frozen_neighbors);
    }
    let d = 1usize << cluster.len();
    let mut h = Array2::<Complex64>::zeros((d, d));
    for (p, &qp) in cluster.iter().enumerate() {
        for (q, &qq) in cluster.iter().enumerate().skip(p + 1) {
            let w = device.omega_zz(qp, qq);
            if w == 0.0 {
                continue;
            }
            let (mp, mq) = (1 << p, 1 << q);
            for i in 0..d {
                let j = i ^ mp ^ mq;
                // <j| P_p P_q |i>
                let amp = match kind {
                    CouplingKind::Xx => ONE,
                    _ => {
                        // Y|0> = i|1>, Y|1> = -i|0>
                        let y = |m: usize| {
                            if i & m == 0 {
                                Complex64::new(0.0, 1.0)
                            } else {
                                Complex64::new(0.0, -1.0)
                            }
                        };
                        y(mp) * y(mq)
                    }
                };
                h[[j, i]] += amp * w;
            }
        }
    }
    Hamiltonian::Dense(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseKind {
    /// `|0><1|`
    Relaxation,
    /// `Z`
    Dephasing,
}

/// Dissipator `rate * (A rho A^dag - {A^dag A, rho} / 2)` on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseOp {
    pub qubit: usize,
    pub kind: CollapseKind,
    pub rate: f64,
}

impl CollapseOp {
    /// Amplitude damping at rate 1/T1; `None` when T1 is infinite.
    pub fn relaxation(qubit: usize, t1_us: f64) -> Option<Self> {
        (t1_us.is_finite()).then(|| CollapseOp {
            qubit,
            kind: CollapseKind::Relaxation,
            rate: 1.0 / t1_us,
        })
    }

    /// Pure dephasing with coherences decaying as exp(-t/T2).
    pub fn dephasing(qubit: usize, t2_us: f64) -> Option<Self> {
        (t2_us.is_finite()).then(|| CollapseOp {
            qubit,
            kind: CollapseKind::Dephasing,
            rate: 1.0 / (2.0 * t2_us),
        })
    }
}

/// Precomputed right-hand side of the master equation for one cluster.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    dim: usize,
    /// Elementwise factor: `-i(h_i - h_j)` for diagonal H plus the
    /// anticommutator and dephasing terms.
    coef: Vec<Complex64>,
    dense_h: Option<Array2<Complex64>>,
    /// `(mask, rate)` of every relaxation jump.
    jumps: Vec<(usize, f64)>,
    timescale_us: f64,
    trivial: bool,
}

impl Lindbladian {
    pub fn new(qubits: &[usize], h: &Hamiltonian, ops: &[CollapseOp]) -> Result<Self> {
        let dim = 1usize << qubits.len();
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: h.dim(),
            });
        }
        let mut coef = vec![ZERO; dim * dim];
        let mut dense_h = None;
        let mut has_h = false;
        match h {
            Hamiltonian::Diagonal(e) => {
                for i in 0..dim {
                    for j in 0..dim {
                        coef[i * dim + j] = Complex64::new(0.0, -(e[i] - e[j]));
                    }
                }
                has_h = h.spread() != 0.0;
            }
            Hamiltonian::Dense(m) => {
                if m.iter().any(|z| z.norm() != 0.0) {
                    dense_h = Some(m.as_standard_layout().into_owned());
                    has_h = true;
                }
            }
        }
        let mut jumps = Vec::new();
        let mut timescale = f64::INFINITY;
        for op in ops {
            let m = qubits
                .iter()
                .position(|&q| q == op.qubit)
                .map(|k| 1usize << k)
                .ok_or_else(|| Error::QubitOutsideCluster {
                    qubit: op.qubit,
                    cluster: qubits.to_vec(),
                })?;
            if !(op.rate >= 0.0) || !op.rate.is_finite() {
                return Err(Error::Numerical(format!("invalid collapse rate {}", op.rate)));
            }
            if op.rate == 0.0 {
                continue;
            }
            for i in 0..dim {
                for j in 0..dim {
                    let c = &mut coef[i * dim + j];
                    match op.kind {
                        CollapseKind::Dephasing => {
                            if (i ^ j) & m != 0 {
                                *c -= 2.0 * op.rate;
                            }
                        }
                        CollapseKind::Relaxation => {
                            let n = ((i & m != 0) as u8 + (j & m != 0) as u8) as f64;
                            *c -= 0.5 * op.rate * n;
                        }
                    }
                }
            }
            match op.kind {
                CollapseKind::Relaxation => {
                    jumps.push((m, op.rate));
                    timescale = timescale.min(1.0 / op.rate);
                }
                CollapseKind::Dephasing => timescale = timescale.min(0.5 / op.rate),
            }
        }
        let spread = h.spread();
        if spread > 0.0 {
            timescale = timescale.min(std::f64::consts::PI / (2.0 * spread));
        }
        let trivial = !has_h && coef.iter().all(|z| *z == ZERO) && jumps.is_empty();
        Ok(Lindbladian {
            dim,
            coef,
            dense_h,
            jumps,
            timescale_us: timescale,
            trivial,
        })
    }

    /// Shortest physical timescale: min(T1, T2, pi / (4 Omega_max)).
    pub fn timescale_us(&self) -> f64 {
        self.timescale_us
    }

    /// True when the generator is identically zero.
    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = L(rho)` on row-major flat matrices.
    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        for ((o, r), c) in out.iter_mut().zip(rho).zip(&self.coef) {
            *o = r * c;
        }
        if let Some(h) = &self.dense_h {
            let h = h.as_slice().expect("standard layout");
            let mi = Complex64::new(0.0, -1.0);
            for i in 0..d {
                for j in 0..d {
                    let mut acc = ZERO;
                    for k in 0..d {
                        acc += h[i * d + k] * rho[k * d + j] - rho[i * d + k] * h[k * d + j];
                    }
                    out[i * d + j] += mi * acc;
                }
            }
        }
        for &(m, rate) in &self.jumps {
            for i in (0..d).filter(|i| i & m == 0) {
                let src = (i | m) * d;
                for j in (0..d).filter(|j| j & m == 0) {
                    out[i * d + j] += rate * rho[src + (j | m)];
                }
            }
        }
    }
}

/// `d rho / dt` for the given Hamiltonian and collapse operators.
pub fn lindblad_rhs(
    state: &ClusterState,
    h: &Hamiltonian,
    ops: &[CollapseOp],
) -> Result<Array2<Complex64>> {
    let l = Lindbladian::new(state.qubits(), h, ops)?;
    let d = state.dim();
    let mut out = vec![ZERO; d * d];
    l.apply(state.data(), &mut out);
    Ok(Array2::from_shape_vec((d, d), out).expect("square"))
}
