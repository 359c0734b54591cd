//! Verdict tables as CSV and JSON lines.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::InequalityVerdict;
use crate::error::{Error, Result};
use crate::functionals::Exponent;

/// Fixed CSV column order for one-dimensional verdicts.
pub const CSV_COLUMNS: [&str; 11] = [
    "claim_id",
    "family",
    "params_digest",
    "p",
    "q",
    "alpha",
    "lhs",
    "rhs",
    "margin",
    "tightness",
    "holds",
];

/// One verdict together with the density it was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub family: Arc<str>,
    pub params_digest: Arc<str>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_digest: Option<String>,
    #[serde(flatten)]
    pub verdict: InequalityVerdict,
}

impl VerdictRow {
    pub fn new(family: Arc<str>, params_digest: Arc<str>, verdict: InequalityVerdict) -> Self {
        Self {
            family,
            params_digest,
            sigma_digest: None,
            verdict,
        }
    }
}

fn exp_field(e: Option<Exponent>) -> String {
    e.map(|e| e.to_string()).unwrap_or_default()
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("write failed: {e}"))
}

/// Writes rows as CSV. Floats use the shortest representation that round-trips.
/// When any row is multivariate, `n` and `sigma_digest` columns are appended.
pub fn write_csv<W: Write>(rows: &[VerdictRow], out: W) -> Result<()> {
    let nd = rows.iter().any(|r| r.verdict.inputs.n.is_some_and(|n| n >= 2));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if nd {
        header.extend(["n", "sigma_digest"]);
    }
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let v = &r.verdict;
        let mut rec = vec![
            v.claim.wire_name().to_string(),
            r.family.to_string(),
            r.params_digest.to_string(),
            exp_field(v.inputs.p),
            exp_field(v.inputs.q),
            v.inputs.alpha.map(|a| a.to_string()).unwrap_or_default(),
            v.lhs.to_string(),
            v.rhs.to_string(),
            v.margin.to_string(),
            v.tightness.to_string(),
            v.holds.to_string(),
        ];
        if nd {
            rec.push(v.inputs.n.map(|n| n.to_string()).unwrap_or_default());
            rec.push(r.sigma_digest.clone().unwrap_or_default());
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// Writes one JSON object per row.
pub fn write_jsonl<W: Write>(rows: &[VerdictRow], mut out: W) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r).map_err(io)?;
        out.write_all(b"\n").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::{ClaimId, VerdictInputs};

    #[test]
    fn csv_has_fixed_columns_and_round_trip_floats() {
        let v = InequalityVerdict::from_logs(
            ClaimId::NormRatio,
            -0.1,
            0.2,
            1e-9,
            VerdictInputs {
                p: Some(Exponent::Infinity),
                q: Some(Exponent::Finite(2.0)),
                alpha: Some(1.5),
                ..Default::default()
            },
        );
        let row = VerdictRow::new("gaussian".into(), "abcd".into(), v);
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&fields[..6], &["theorem1", "gaussian", "abcd", "inf", "2", "1.5"]);
        assert_eq!(fields[6].parse::<f64>().unwrap(), v.lhs);
        let mut buf = Vec::new();
        write_jsonl(std::slice::from_ref(&row), &mut buf).unwrap();
        let back: VerdictRow = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, row);
    }
}
