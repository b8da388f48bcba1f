//! Fixed-step RK4 integration of a cluster through its gate schedule.

use num_complex::Complex64;

use super::density::{ClusterState, Lindbladian};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// RK4 steps per shortest timescale (or per segment, whichever is shorter).
pub const STEPS_PER_TIMESCALE: f64 = 200.0;

/// Trace drift above which the state is renormalized after a segment.
pub const TRACE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Idle { duration_us: f64 },
    Gate(Gate),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvolveStats {
    pub rk4_steps: usize,
    pub max_trace_drift: f64,
}

/// Unitary events touching `cluster`, interleaved with the idle gaps between
/// distinct event times, up to the end of the circuit.
pub fn schedule_for(circuit: &Circuit, cluster: &[usize]) -> Vec<Step> {
    let mut steps = Vec::new();
    let mut now_ns = 0.0;
    let idle = |from: f64, to: f64| Step::Idle {
        duration_us: (to - from) / 1000.0,
    };
    for g in circuit.gates.iter().filter(|g| g.kind.is_unitary()) {
        if !g.qubits.iter().any(|q| cluster.contains(q)) {
            continue;
        }
        if g.at_ns > now_ns {
            steps.push(idle(now_ns, g.at_ns));
            now_ns = g.at_ns;
        }
        steps.push(Step::Gate(g.clone()));
    }
    let end = circuit.duration_ns();
    if end > now_ns {
        steps.push(idle(now_ns, end));
    }
    steps
}

pub fn evolve(state: &mut ClusterState, schedule: &[Step], l: &Lindbladian) -> Result<EvolveStats> {
    let mut stats = EvolveStats::default();
    let mut work = Rk4Work::new(state.dim());
    for step in schedule {
        match step {
            Step::Gate(g) => state.apply_gate(g)?,
            Step::Idle { duration_us } => {
                let s = evolve_segment(state, *duration_us, l, &mut work)?;
                stats.rk4_steps += s.rk4_steps;
                stats.max_trace_drift = stats.max_trace_drift.max(s.max_trace_drift);
            }
        }
    }
    Ok(stats)
}

/// Free evolution for `duration_us` under `l`.
pub fn evolve_delay(state: &mut ClusterState, duration_us: f64, l: &Lindbladian) -> Result<EvolveStats> {
    let mut work = Rk4Work::new(state.dim());
    evolve_segment(state, duration_us, l, &mut work)
}

struct Rk4Work {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Rk4Work {
    fn new(d: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); d * d];
        Rk4Work {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }
}

fn evolve_segment(
    state: &mut ClusterState,
    duration_us: f64,
    l: &Lindbladian,
    w: &mut Rk4Work,
) -> Result<EvolveStats> {
    if l.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: l.dim(),
        });
    }
    if !(duration_us >= 0.0) || !duration_us.is_finite() {
        return Err(Error::Numerical(format!("invalid segment length {duration_us}")));
    }
    if duration_us == 0.0 || l.is_trivial() {
        return Ok(EvolveStats::default());
    }
    let h_max = l.timescale_us().min(duration_us) / STEPS_PER_TIMESCALE;
    let n = (duration_us / h_max).ceil() as usize;
    if !(h_max > 0.0) || n == 0 || n > 500_000_000 {
        return Err(Error::Numerical(format!("step size {h_max} us is unusable")));
    }
    let h = duration_us / n as f64;
    let rho = state.data_mut();
    let [k1, k2, k3, k4] = &mut w.k;
    let tmp = &mut w.tmp;
    for _ in 0..n {
        l.apply(rho, k1);
        axpy_into(tmp, rho, 0.5 * h, k1);
        l.apply(tmp, k2);
        axpy_into(tmp, rho, 0.5 * h, k2);
        l.apply(tmp, k3);
        axpy_into(tmp, rho, h, k3);
        l.apply(tmp, k4);
        for i in 0..rho.len() {
            rho[i] += (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) * (h / 6.0);
        }
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite density matrix entry".into()));
    }
    let drift = state.renormalize();
    Ok(EvolveStats {
        rk4_steps: n,
        max_trace_drift: drift,
    })
}

fn axpy_into(out: &mut [Complex64], x: &[Complex64], a: f64, y: &[Complex64]) {
    for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
        *o = x + y * a;
    }
}
