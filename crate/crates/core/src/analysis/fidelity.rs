//! Fidelity estimation from shot histograms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::CountsRecord;

/// Fraction of shots in which every qubit of `group` read 0.
pub fn estimate_fidelity(record: &CountsRecord, group: &[usize]) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    if record.shots == 0 {
        return Err(Error::field("shots", format!("record `{}` has no shots", record.pattern_id)));
    }
    let width = record.num_qubits().unwrap_or(0);
    if let Some(&q) = group.iter().find(|&&q| q >= width) {
        return Err(Error::NotMeasured(q));
    }
    let hits: u64 = record
        .histogram
        .iter()
        .filter(|(bits, _)| group.iter().all(|&q| !CountsRecord::bit(bits, q)))
        .map(|(_, n)| n)
        .sum();
    Ok(hits as f64 / record.shots as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub tau_us: f64,
    pub fidelity: f64,
    /// Binomial standard error `sqrt(F (1 - F) / shots)`.
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySeries {
    pub pattern_id: String,
    pub group: Vec<usize>,
    /// Sorted by tau.
    pub points: Vec<FidelityPoint>,
}

impl FidelitySeries {
    /// Builds the series of `group` over every record (any order).
    pub fn from_records<'r>(
        records: impl IntoIterator<Item = &'r CountsRecord>,
        group: &[usize],
    ) -> Result<Self> {
        let mut pattern_id = None::<String>;
        let mut points = Vec::new();
        for r in records {
            match &pattern_id {
                None => pattern_id = Some(r.pattern_id.clone()),
                Some(p) if *p != r.pattern_id => {
                    return Err(Error::field(
                        "pattern_id",
                        format!("series mixes `{p}` and `{}`", r.pattern_id),
                    ))
                }
                _ => {}
            }
            let f = estimate_fidelity(r, group)?;
            points.push(FidelityPoint {
                tau_us: r.tau_us,
                fidelity: f,
                std_err: (f * (1.0 - f) / r.shots as f64).sqrt(),
            });
        }
        points.sort_by(|a, b| a.tau_us.total_cmp(&b.tau_us));
        Ok(FidelitySeries {
            pattern_id: pattern_id.unwrap_or_default(),
            group: group.to_vec(),
            points,
        })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau_us).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.fidelity).collect()
    }

    /// Fidelity at a grid point (matched to 1e-9 relative).
    pub fn at(&self, tau_us: f64) -> Result<f64> {
        self.points
            .iter()
            .find(|p| (p.tau_us - tau_us).abs() <= 1e-9 * tau_us.abs().max(1.0))
            .map(|p| p.fidelity)
            .ok_or(Error::MissingTau { tau_us })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn record(tau: f64, hist: &[(&str, u64)]) -> CountsRecord {
        CountsRecord {
            pattern_id: "blank_one".into(),
            variant: "blank_one".into(),
            tau_us: tau,
            shots: hist.iter().map(|(_, n)| n).sum(),
            seed: 0,
            histogram: hist.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        }
    }

    #[test]
    fn counts_zero_outcomes_of_the_group() {
        let r = record(1.0, &[("000", 50), ("001", 20), ("100", 30)]);
        assert_eq!(estimate_fidelity(&r, &[0]).unwrap(), 0.8);
        assert_eq!(estimate_fidelity(&r, &[2]).unwrap(), 0.7);
        assert_eq!(estimate_fidelity(&r, &[0, 2]).unwrap(), 0.5);
        assert!(matches!(estimate_fidelity(&r, &[]), Err(Error::EmptyGroup)));
        assert!(matches!(estimate_fidelity(&r, &[3]), Err(Error::NotMeasured(3))));
    }

    #[test]
    fn series_sorted_and_indexed() {
        let recs = [record(5.0, &[("0", 3), ("1", 1)]), record(1.0, &[("0", 4)])];
        let s = FidelitySeries::from_records(&recs, &[0]).unwrap();
        assert_eq!(s.taus(), vec![1.0, 5.0]);
        assert_eq!(s.at(5.0).unwrap(), 0.75);
        assert!(matches!(s.at(2.0), Err(Error::MissingTau { .. })));
        assert!((s.points[1].std_err - (0.75f64 * 0.25 / 4.0).sqrt()).abs() < 1e-15);
    }
}
