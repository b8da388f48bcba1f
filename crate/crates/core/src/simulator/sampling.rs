//! Shot histograms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of one circuit execution. Bitstrings are little-endian: qubit 0 is
/// the rightmost character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub pattern_id: String,
    pub variant: String,
    pub tau_us: f64,
    pub shots: u64,
    pub seed: u64,
    pub histogram: BTreeMap<String, u64>,
}

impl CountsRecord {
    /// Bitstring length, `None` for an empty histogram.
    pub fn num_qubits(&self) -> Option<usize> {
        self.histogram.keys().next().map(String::len)
    }

    pub fn validate(&self) -> Result<()> {
        let found: u64 = self.histogram.values().sum();
        if found != self.shots {
            return Err(Error::ShotMismatch {
                record: self.pattern_id.clone(),
                expected: self.shots,
                found,
            });
        }
        let len = self.num_qubits().unwrap_or(0);
        for key in self.histogram.keys() {
            if key.len() != len || !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::field(
                    "histogram",
                    format!("bad bitstring `{key}` in `{}`", self.pattern_id),
                ));
            }
        }
        Ok(())
    }

    /// Whether qubit `q` reads 1 in `bitstring`.
    pub fn bit(bitstring: &str, q: usize) -> bool {
        let b = bitstring.as_bytes();
        b[b.len() - 1 - q] == b'1'
    }
}
