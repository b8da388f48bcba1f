use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::GateDurations;
use crate::device_file::{CouplingRecord, DeviceFile, GateDurationsRecord, QubitRecord};
use crate::error::{Error, Result};
use crate::topology::ChipTopology;

pub const DEFAULT_CLUSTER_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Relaxation time in us; `f64::INFINITY` disables the channel.
    pub t1_us: f64,
    /// Coherence time in us; `f64::INFINITY` disables the channel.
    pub t2_us: f64,
    pub omega01_ghz: Option<f64>,
    /// Anharmonicity, negative for transmons.
    pub alpha_ghz: Option<f64>,
    /// `p(read 1 | 0)`
    pub p10: f64,
    /// `p(read 0 | 1)`
    pub p01: f64,
}

impl QubitParams {
    pub fn ideal() -> Self {
        QubitParams {
            t1_us: f64::INFINITY,
            t2_us: f64::INFINITY,
            omega01_ghz: None,
            alpha_ghz: None,
            p10: 0.0,
            p01: 0.0,
        }
    }

    pub fn with_times(t1_us: f64, t2_us: f64) -> Self {
        QubitParams {
            t1_us,
            t2_us,
            ..QubitParams::ideal()
        }
    }

    /// 1 -> 2 transition frequency.
    pub fn omega12_ghz(&self) -> Option<f64> {
        Some(self.omega01_ghz? + self.alpha_ghz?)
    }

    /// Two-photon 0 -> 2 transition frequency.
    pub fn omega02_ghz(&self) -> Option<f64> {
        Some(2.0 * self.omega01_ghz? + self.alpha_ghz?)
    }
}

/// Which two-body operator the always-on coupling uses. Only `Zz` is the
/// physical model; the others exist to show they do not fit the |1> data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    #[default]
    Zz,
    Xx,
    Yy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    pub qubits: Vec<QubitParams>,
    /// Omega/2pi in MHz per edge `(min, max)`.
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub coupling_kind: CouplingKind,
    /// Leakage probability per flagged triplet per CX.
    pub collision_p_leak: f64,
    pub heating_kappa: f64,
    pub cluster_cap: usize,
    pub gate_durations: GateDurations,
}

impl DeviceModel {
    /// Decoherence-free, uncoupled device.
    pub fn noiseless(num_qubits: usize) -> Self {
        DeviceModel {
            qubits: vec![QubitParams::ideal(); num_qubits],
            couplings: BTreeMap::new(),
            coupling_kind: CouplingKind::Zz,
            collision_p_leak: 0.0,
            heating_kappa: 0.0,
            cluster_cap: DEFAULT_CLUSTER_CAP,
            gate_durations: GateDurations::default(),
        }
    }

    /// Every qubit with the same T1 and T2, no couplings.
    pub fn uniform(num_qubits: usize, t1_us: f64, t2_us: f64) -> Self {
        DeviceModel {
            qubits: vec![QubitParams::with_times(t1_us, t2_us); num_qubits],
            ..DeviceModel::noiseless(num_qubits)
        }
    }

    /// Sets Omega/2pi (MHz) on every edge of the topology.
    pub fn with_uniform_coupling(mut self, topo: &ChipTopology, omega_2pi_mhz: f64) -> Self {
        for &(a, b) in topo.edges() {
            self.couplings.insert((a, b), omega_2pi_mhz);
        }
        self
    }

    pub fn with_coupling(mut self, i: usize, j: usize, omega_2pi_mhz: f64) -> Self {
        self.couplings.insert((i.min(j), i.max(j)), omega_2pi_mhz);
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Coupling as an angular frequency in rad/us (Omega = 2pi * MHz value).
    pub fn omega_zz(&self, i: usize, j: usize) -> f64 {
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .map_or(0.0, |mhz| 2.0 * PI * mhz)
    }

    pub fn from_file(file: &DeviceFile, topo: &ChipTopology) -> Result<Self> {
        let n = topo.num_qubits();
        let records = file
            .qubits
            .as_ref()
            .ok_or_else(|| Error::field("qubits", "calibration block missing"))?;
        if records.len() != n {
            return Err(Error::field(
                "qubits",
                format!("expected {n} records, found {}", records.len()),
            ));
        }
        let qubits = records
            .iter()
            .map(|r| QubitParams {
                t1_us: r.t1_us,
                t2_us: r.t2_us,
                omega01_ghz: r.omega01_ghz,
                alpha_ghz: r.alpha_ghz,
                p10: r.readout[0],
                p01: r.readout[1],
            })
            .collect();
        let mut couplings = BTreeMap::new();
        for (k, c) in file.couplings.iter().flatten().enumerate() {
            if !topo.has_edge(c.i, c.j) {
                return Err(Error::field(
                    format!("couplings[{k}]"),
                    format!("({}, {}) is not an edge of the topology", c.i, c.j),
                ));
            }
            if couplings.insert((c.i.min(c.j), c.i.max(c.j)), c.omega_zz_2pi_mhz).is_some() {
                return Err(Error::field(format!("couplings[{k}]"), "duplicate coupling"));
            }
        }
        let coupling_kind = match file.coupling_kind.as_deref() {
            None | Some("zz") => CouplingKind::Zz,
            Some("xx") => CouplingKind::Xx,
            Some("yy") => CouplingKind::Yy,
            Some(other) => {
                return Err(Error::field("coupling_kind", format!("unknown kind `{other}`")))
            }
        };
        let gate_durations = file.gate_durations_ns.map_or_else(GateDurations::default, |g| {
            GateDurations {
                x_ns: g.x,
                h_ns: g.h,
                cx_ns: g.cx,
            }
        });
        let model = DeviceModel {
            qubits,
            couplings,
            coupling_kind,
            collision_p_leak: file.collision_p_leak.unwrap_or(0.0),
            heating_kappa: file.heating_kappa.unwrap_or(0.0),
            cluster_cap: file.cluster_cap.unwrap_or(DEFAULT_CLUSTER_CAP),
            gate_durations,
        };
        model.validate()?;
        Ok(model)
    }

    /// Writes the model back into a device file around `topo`.
    pub fn to_file(&self, topo: &ChipTopology, name: Option<String>) -> DeviceFile {
        DeviceFile {
            name,
            num_qubits: topo.num_qubits(),
            edges: topo.edges().iter().map(|&(a, b)| [a, b]).collect(),
            coords: topo.coords().map(|c| c.to_vec()),
            qubits: Some(
                self.qubits
                    .iter()
                    .map(|q| QubitRecord {
                        t1_us: q.t1_us,
                        t2_us: q.t2_us,
                        omega01_ghz: q.omega01_ghz,
                        alpha_ghz: q.alpha_ghz,
                        readout: [q.p10, q.p01],
                    })
                    .collect(),
            ),
            couplings: Some(
                self.couplings
                    .iter()
                    .map(|(&(i, j), &v)| CouplingRecord {
                        i,
                        j,
                        omega_zz_2pi_mhz: v,
                    })
                    .collect(),
            ),
            collision_p_leak: Some(self.collision_p_leak),
            heating_kappa: Some(self.heating_kappa),
            cluster_cap: Some(self.cluster_cap),
            coupling_kind: Some(
                match self.coupling_kind {
                    CouplingKind::Zz => "zz",
                    CouplingKind::Xx => "xx",
                    CouplingKind::Yy => "yy",
                }
                .to_string(),
            ),
            gate_durations_ns: Some(GateDurationsRecord {
                x: self.gate_durations.x_ns,
                h: self.gate_durations.h_ns,
                cx: self.gate_durations.cx_ns,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        for (k, q) in self.qubits.iter().enumerate() {
            if !(q.t1_us > 0.0) || !(q.t2_us > 0.0) {
                return Err(Error::field(format!("qubits[{k}]"), "T1 and T2 must be > 0"));
            }
            if !prob(q.p10) || !prob(q.p01) {
                return Err(Error::field(format!("qubits[{k}].readout"), "probability outside [0, 1]"));
            }
        }
        if self.couplings.values().any(|v| !v.is_finite()) {
            return Err(Error::field("couplings", "non-finite coupling"));
        }
        if !prob(self.collision_p_leak) {
            return Err(Error::field("collision_p_leak", "probability outside [0, 1]"));
        }
        if !(self.heating_kappa >= 0.0) {
            return Err(Error::field("heating_kappa", "must be >= 0"));
        }
        if self.cluster_cap == 0 {
            return Err(Error::field("cluster_cap", "must be >= 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falcon_file_loads() {
        let text = include_str!("../../../../devices/falcon27.json");
        let file = DeviceFile::parse(text).unwrap();
        let topo = ChipTopology::from_device_file(&file).unwrap();
        let dev = DeviceModel::from_file(&file, &topo).unwrap();
        assert_eq!(dev.num_qubits(), 27);
        assert!((dev.omega_zz(20, 19) - 2.0 * PI * 0.155).abs() < 1e-12);
        assert!((dev.qubits[24].omega12_ghz().unwrap() - 4.7329).abs() < 1e-9);
        let round = DeviceModel::from_file(&dev.to_file(&topo, None), &topo).unwrap();
        assert_eq!(round, dev);
    }

    #[test]
    fn rejects_off_graph_couplings_and_bad_probabilities() {
        let topo = ChipTopology::path(3);
        let mut file = DeviceModel::uniform(3, 50.0, 60.0).to_file(&topo, None);
        file.couplings = Some(vec![CouplingRecord {
            i: 0,
            j: 2,
            omega_zz_2pi_mhz: 0.1,
        }]);
        assert!(DeviceModel::from_file(&file, &topo).is_err());

        let mut dev = DeviceModel::uniform(3, 50.0, 60.0);
        dev.qubits[1].p01 = 1.5;
        assert!(dev.validate().is_err());
        let mut dev = DeviceModel::uniform(3, 50.0, 60.0);
        dev.qubits[0].t2_us = 0.0;
        assert!(dev.validate().is_err());
    }
}
