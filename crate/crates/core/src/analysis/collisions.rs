//! Frequency-collision screening over chains of three coupled qubits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::DeviceModel;
use crate::topology::{ChipTopology, Triplet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionType {
    /// The 1-2 line of `a` sits on the 0-1 line of `c`.
    Type1,
    /// The two-photon line `2 w01(b) + alpha(b)` sits on `w01(a) + w01(c)`.
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub kind: CollisionType,
    pub triplet: Triplet,
    pub detuning_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionThresholds {
    pub type1_mhz: f64,
    pub type2_mhz: f64,
}

impl Default for CollisionThresholds {
    fn default() -> Self {
        CollisionThresholds {
            type1_mhz: 10.0,
            type2_mhz: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub thresholds: CollisionThresholds,
    /// Number of chains `(a, b, c)` examined (each unordered chain once).
    pub chains_checked: usize,
    /// Sorted by type, then triplet.
    pub collisions: Vec<Collision>,
}

impl CollisionReport {
    pub fn contains(&self, kind: CollisionType, triplet: Triplet) -> bool {
        self.collisions.iter().any(|c| c.kind == kind && c.triplet == triplet)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# chains {} thresholds type1 {} MHz type2 {} MHz\n",
            self.chains_checked, self.thresholds.type1_mhz, self.thresholds.type2_mhz
        );
        for c in &self.collisions {
            let kind = match c.kind {
                CollisionType::Type1 => "type1",
                CollisionType::Type2 => "type2",
            };
            out.push_str(&format!("{kind} {} {:.3}\n", c.triplet, c.detuning_mhz));
        }
        out
    }
}

/// Checks every chain `a - b - c`. Type-1 is directional (`a` is the excited
/// spectator, `c` the driven qubit); type-2 is reported once with `a < c`.
pub fn detect_collisions(
    device: &DeviceModel,
    topo: &ChipTopology,
    thresholds: &CollisionThresholds,
) -> Result<CollisionReport> {
    let freq = |q: usize| -> Result<(f64, f64)> {
        let p = device.qubits.get(q).ok_or(Error::MissingFrequency(q))?;
        match (p.omega01_ghz, p.alpha_ghz) {
            (Some(w), Some(a)) => Ok((w, a)),
            _ => Err(Error::MissingFrequency(q)),
        }
    };
    let mut collisions = Vec::new();
    let mut chains = 0;
    for b in 0..topo.num_qubits() {
        let nb = topo.neighbors(b);
        for (i, &a) in nb.iter().enumerate() {
            for &c in &nb[i + 1..] {
                chains += 1;
                let (wa, aa) = freq(a)?;
                let (wb, ab) = freq(b)?;
                let (wc, ac) = freq(c)?;
                for (x, wx, ax, y, wy) in [(a, wa, aa, c, wc), (c, wc, ac, a, wa)] {
                    let d = (wx + ax - wy).abs() * 1000.0;
                    if d <= thresholds.type1_mhz {
                        collisions.push(Collision {
                            kind: CollisionType::Type1,
                            triplet: Triplet::new(x, b, y),
                            detuning_mhz: d,
                        });
                    }
                }
                let d = (2.0 * wb + ab - wa - wc).abs() * 1000.0;
                if d <= thresholds.type2_mhz {
                    collisions.push(Collision {
                        kind: CollisionType::Type2,
                        triplet: Triplet::new(a.min(c), b, a.max(c)),
                        detuning_mhz: d,
                    });
                }
            }
        }
    }
    collisions.sort_by(|x, y| (x.kind, x.triplet).cmp(&(y.kind, y.triplet)));
    Ok(CollisionReport {
        thresholds: *thresholds,
        chains_checked: chains,
        collisions,
    })
}
