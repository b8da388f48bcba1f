//! On-disk schema of the device description file.
//!
//! A device file is a JSON document carrying the coupling graph, layout
//! coordinates and (optionally) the calibration blocks consumed by
//! [`DeviceModel`](crate::simulator::DeviceModel):
//!
//! ```json
//! {
//!   "num_qubits": 3,
//!   "edges": [[0, 1], [1, 2]],
//!   "coords": [[0, 0], [1, 0], [2, 0]],
//!   "qubits": [{"t1_us": 100, "t2_us": 120, "omega01_ghz": 5.0, "alpha_ghz": -0.34, "readout": [0, 0]}],
//!   "couplings": [{"i": 0, "j": 1, "omega_zz_2pi_mhz": 0.155}],
//!   "collision_p_leak": 0.3,
//!   "heating_kappa": 0.0,
//!   "cluster_cap": 10,
//!   "coupling_kind": "zz",
//!   "gate_durations_ns": {"x": 35, "h": 35, "cx": 500}
//! }
//! ```
//!
//! Only `num_qubits` and `edges` are required to obtain a topology; the
//! calibration fields are required by [`DeviceModel::from_file`](crate::simulator::DeviceModel::from_file).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub num_qubits: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<QubitRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<CouplingRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision_p_leak: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heating_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_durations_ns: Option<GateDurationsRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitRecord {
    pub t1_us: f64,
    pub t2_us: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega01_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_ghz: Option<f64>,
    /// `[p(1|0), p(0|1)]`
    #[serde(default)]
    pub readout: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingRecord {
    pub i: usize,
    pub j: usize,
    pub omega_zz_2pi_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDurationsRecord {
    pub x: f64,
    pub h: f64,
    pub cx: f64,
}

impl DeviceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("device file serializes")
    }
}
