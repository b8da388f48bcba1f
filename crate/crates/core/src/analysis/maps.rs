//! Per-qubit fidelity-difference maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{Bipartition, ChipTopology};

/// Fidelity difference per qubit at one delay. Qubits without a comparison
/// (spectators) hold 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureMap {
    pub title: String,
    pub tau_us: f64,
    pub topology: ChipTopology,
    pub values: Vec<f64>,
    /// Qubits that carry a measured difference.
    pub compared: Vec<usize>,
}

impl FailureMap {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn value(&self, q: usize) -> f64 {
        self.values[q]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Qubit with the largest positive difference.
    pub fn worst(&self) -> Option<(usize, f64)> {
        self.compared
            .iter()
            .map(|&q| (q, self.values[q]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// `dF(q) = reference(q) - test(q)` for every qubit of `test`.
pub fn delta_map(
    topo: &ChipTopology,
    title: impl Into<String>,
    tau_us: f64,
    reference: &BTreeMap<usize, f64>,
    test: &BTreeMap<usize, f64>,
) -> Result<FailureMap> {
    let n = topo.num_qubits();
    let mut values = vec![0.0; n];
    let mut compared = Vec::new();
    for (&q, &f) in test {
        if q >= n {
            return Err(Error::field("test", format!("qubit {q} outside the topology")));
        }
        let r = reference
            .get(&q)
            .ok_or_else(|| Error::field("reference", format!("no fidelity for qubit {q}")))?;
        values[q] = r - f;
        compared.push(q);
    }
    Ok(FailureMap {
        title: title.into(),
        tau_us,
        topology: topo.clone(),
        values,
        compared,
    })
}

/// Two-qubit fidelity of independent qubits.
pub fn product_fidelity(f_a: f64, f_b: f64) -> f64 {
    f_a * f_b
}

/// `dF = F_A(a) F_B(b) - F_bell(a, b)` written onto both qubits of each pair.
/// `single` holds the per-qubit fidelities of the two checkerboard |+>
/// patterns; every pair must straddle the bipartition.
pub fn bell_delta_map(
    topo: &ChipTopology,
    title: impl Into<String>,
    tau_us: f64,
    bipartition: &Bipartition,
    single: &BTreeMap<usize, f64>,
    bell: &[((usize, usize), f64)],
) -> Result<FailureMap> {
    let mut values = vec![0.0; topo.num_qubits()];
    let mut compared = Vec::new();
    for &((a, b), f_bell) in bell {
        let split = (bipartition.contains_a(a) && bipartition.contains_b(b))
            || (bipartition.contains_b(a) && bipartition.contains_a(b));
        if !split {
            return Err(Error::PairNotSplit(a, b));
        }
        let get = |q: usize| {
            single
                .get(&q)
                .copied()
                .ok_or_else(|| Error::field("single", format!("no fidelity for qubit {q}")))
        };
        let d = product_fidelity(get(a)?, get(b)?) - f_bell;
        values[a] = d;
        values[b] = d;
        compared.extend([a, b]);
    }
    compared.sort_unstable();
    Ok(FailureMap {
        title: title.into(),
        tau_us,
        topology: topo.clone(),
        values,
        compared,
    })
}
