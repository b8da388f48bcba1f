//! Plain-text counts files.
//!
//! One record per line:
//!
//! ```text
//! <pattern_id> <variant> <tau_us> <shots> <seed> <bitstring>:<count> ...
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::simulator::CountsRecord;

pub const HEADER: &str = "# qpattern counts v1";

pub fn format_record(r: &CountsRecord) -> String {
    let mut line = format!("{} {} {} {} {}", r.pattern_id, r.variant, r.tau_us, r.shots, r.seed);
    for (bits, n) in &r.histogram {
        line.push_str(&format!(" {bits}:{n}"));
    }
    line
}

pub fn write_counts(records: &[CountsRecord]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

pub fn parse_counts(text: &str) -> Result<Vec<CountsRecord>> {
    let mut records = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::MalformedRecord {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(bad(format!("expected at least 5 fields, found {}", fields.len())));
        }
        let tau_us: f64 = fields[2].parse().map_err(|_| bad(format!("bad tau `{}`", fields[2])))?;
        let shots: u64 = fields[3].parse().map_err(|_| bad(format!("bad shots `{}`", fields[3])))?;
        let seed: u64 = fields[4].parse().map_err(|_| bad(format!("bad seed `{}`", fields[4])))?;
        let mut histogram = BTreeMap::new();
        for entry in &fields[5..] {
            let (bits, n) = entry
                .split_once(':')
                .ok_or_else(|| bad(format!("bad histogram entry `{entry}`")))?;
            let n: u64 = n.parse().map_err(|_| bad(format!("bad count in `{entry}`")))?;
            if bits.is_empty() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(bad(format!("bad bitstring `{bits}`")));
            }
            if histogram.insert(bits.to_string(), n).is_some() {
                return Err(bad(format!("duplicate bitstring `{bits}`")));
            }
        }
        let record = CountsRecord {
            pattern_id: fields[0].to_string(),
            variant: fields[1].to_string(),
            tau_us,
            shots,
            seed,
            histogram,
        };
        record.validate().map_err(|e| match e {
            Error::ShotMismatch { .. } => e,
            other => bad(other.to_string()),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Reads a counts file recorded elsewhere (hardware or an earlier run).
pub fn ingest_replay(path: &std::path::Path) -> Result<Vec<CountsRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_counts(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip(tau in 0.0f64..1e3, seed in any::<u64>(), counts in proptest::collection::btree_map("[01]{4}", 1u64..1000, 1..8)) {
            let r = CountsRecord {
                pattern_id: "checkerboard_one.A".into(),
                variant: "CHECKERBOARD_ONE".into(),
                tau_us: tau,
                shots: counts.values().sum(),
                seed,
                histogram: counts,
            };
            let text = write_counts(std::slice::from_ref(&r));
            prop_assert_eq!(parse_counts(&text).unwrap(), vec![r]);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# c\nblank_one BLANK_ONE 1 10 0 0:10\nblank_one BLANK_ONE x 10 0 0:10\n";
        assert!(matches!(parse_counts(text), Err(Error::MalformedRecord { line: 3, .. })));
        let text = "blank_one BLANK_ONE 1 10 0 0:9\n";
        assert!(matches!(parse_counts(text), Err(Error::ShotMismatch { .. })));
        let text = "blank_one BLANK_ONE 1 10 0 0:5 11:5\n";
        assert!(matches!(parse_counts(text), Err(Error::MalformedRecord { line: 1, .. })));
    }
}
