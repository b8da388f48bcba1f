//! Statistics over random GHZ chains of one length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzStats {
    pub chain_length: usize,
    pub samples: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    /// `std_dev / sqrt(n)`.
    pub std_error: f64,
    pub fidelities: Vec<f64>,
}

pub fn ghz_statistics(chain_length: usize, fidelities: &[f64]) -> Result<GhzStats> {
    if fidelities.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let n = fidelities.len() as f64;
    let mean = fidelities.iter().sum::<f64>() / n;
    let std_dev = if fidelities.len() > 1 {
        (fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(GhzStats {
        chain_length,
        samples: fidelities.len(),
        mean,
        std_dev,
        std_error: std_dev / n.sqrt(),
        fidelities: fidelities.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_spread() {
        let s = ghz_statistics(3, &[0.8, 0.9, 1.0]).unwrap();
        assert!((s.mean - 0.9).abs() < 1e-15);
        assert!((s.std_dev - 0.1).abs() < 1e-12);
        assert!((s.std_error - 0.1 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(ghz_statistics(2, &[0.5]).unwrap().std_dev, 0.0);
        assert!(ghz_statistics(2, &[]).is_err());
    }
}
