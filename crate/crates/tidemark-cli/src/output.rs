//! Output schemas and writers. Every document here is deterministic: field
//! order is fixed by the struct definitions, floats print in shortest
//! round-trip form, and nothing environment-dependent (timestamps, paths,
//! locales) is ever emitted.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tidemark::{SimResult, Hypothesis};

use crate::CliError;

/// Schema version stamped into every JSON document.
pub const SCHEMA_VERSION: &str = "1";

/// One row of the simulate CSV: `n,hypothesis,trials,errors,p_hat,ci_lo,ci_hi`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CellRecord {
    pub n: usize,
    /// `"H0"` or `"H1"`.
    pub hypothesis: String,
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// One row of an exponent-curve CSV: `lambda,exponent`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub lambda: f64,
    pub exponent: f64,
}

/// One row of the sweep CSV: `lambda,slope,stderr,theory`. The fit columns
/// are empty when the fit was refused (for example, zero observed misses);
/// `theory` is empty when no closed form applies.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub lambda: f64,
    pub slope: Option<f64>,
    pub stderr: Option<f64>,
    pub theory: Option<f64>,
}

/// One-shot detector verdict: `decision,statistic`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DetectRecord {
    /// `"H0"` or `"H1"`.
    pub decision: String,
    /// Empirical mutual information (mi) or signed correlation (corr).
    pub statistic: f64,
}

/// Echo of the simulation parameters, embedded in JSON documents so a
/// result file is self-describing.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SimConfigEcho {
    pub n_list: Vec<usize>,
    pub trials: u64,
    pub sigma2: f64,
    pub lambda: f64,
    pub de: f64,
    pub embedder: String,
    pub detector: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flip: Option<f64>,
}

/// JSON form of a simulation run. Note that JSON has no infinity literal:
/// a divergent theory exponent serializes as `null`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SimulateDoc {
    pub schema_version: String,
    pub config: SimConfigEcho,
    pub cells: Vec<CellRecord>,
    pub theory_exponent: Option<f64>,
}

/// JSON form of one exponent curve.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CurveDoc {
    pub schema_version: String,
    pub embedder: String,
    pub de: f64,
    pub sigma2: f64,
    pub lambda_max: f64,
    pub points: Vec<CurvePoint>,
}

/// Echo of the sweep parameters: like [`SimConfigEcho`] but with the whole
/// threshold list in place of a single λ.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SweepConfigEcho {
    pub n_list: Vec<usize>,
    pub trials: u64,
    pub sigma2: f64,
    pub lambda_list: Vec<f64>,
    pub de: f64,
    pub embedder: String,
    pub detector: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flip: Option<f64>,
}

/// JSON form of a threshold sweep.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SweepDoc {
    pub schema_version: String,
    pub config: SweepConfigEcho,
    pub rows: Vec<SweepRecord>,
}

/// JSON form of a one-shot detection.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DetectDoc {
    pub schema_version: String,
    pub detector: String,
    pub lambda: f64,
    pub decision: String,
    pub statistic: f64,
}

fn hypothesis_label(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::Null => "H0",
        Hypothesis::Marked => "H1",
    }
}

/// Flattens a simulation result into CSV rows.
pub fn cell_records(result: &SimResult) -> Vec<CellRecord> {
    result
        .cells
        .iter()
        .map(|c| CellRecord {
            n: c.n,
            hypothesis: hypothesis_label(c.hypothesis).to_owned(),
            trials: c.trials,
            errors: c.errors,
            p_hat: c.p_hat,
            ci_lo: c.ci_lo,
            ci_hi: c.ci_hi,
        })
        .collect()
}

/// Serializes rows to CSV with a header line, `\n` terminators, and a
/// trailing newline.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Data(format!("csv serialization failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Data(format!("csv flush failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Data(format!("csv is not utf-8: {e}")))
}

/// Parses CSV produced by [`to_csv`] back into rows; the inverse direction
/// of the documented schemas, so emit-parse-emit is byte-stable.
pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| CliError::Data(format!("csv parse failed: {e}"))))
        .collect()
}

/// Serializes a JSON document: pretty-printed, trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::Data(format!("json serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes `content` to `out`, or to stdout when no path is given.
pub fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
                .and_then(|()| lock.flush())
                .map_err(|e| CliError::Data(format!("cannot write to stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_emit_parse_emit_is_byte_stable() {
        let rows = vec![
            CellRecord {
                n: 100,
                hypothesis: "H0".into(),
                trials: 1000,
                errors: 3,
                p_hat: 0.003,
                ci_lo: 0.001,
                ci_hi: 0.009,
            },
            CellRecord {
                n: 100,
                hypothesis: "H1".into(),
                trials: 1000,
                errors: 41,
                p_hat: 0.041,
                ci_lo: 0.030,
                ci_hi: 0.055,
            },
        ];
        let csv1 = to_csv(&rows).unwrap();
        assert!(csv1.starts_with("n,hypothesis,trials,errors,p_hat,ci_lo,ci_hi\n"));
        let parsed: Vec<CellRecord> = from_csv(&csv1).unwrap();
        assert_eq!(parsed, rows);
        assert_eq!(to_csv(&parsed).unwrap(), csv1);
    }

    #[test]
    fn sweep_rows_leave_refused_fits_empty() {
        let rows = vec![
            SweepRecord {
                lambda: 0.1,
                slope: Some(0.2),
                stderr: Some(0.01),
                theory: Some(0.25),
            },
            SweepRecord {
                lambda: 0.9,
                slope: None,
                stderr: None,
                theory: Some(0.0),
            },
        ];
        let csv = to_csv(&rows).unwrap();
        assert!(csv.contains("0.9,,,0.0\n"), "{csv}");
        let parsed: Vec<SweepRecord> = from_csv(&csv).unwrap();
        assert_eq!(parsed, rows);
    }

    #[test]
    fn json_documents_carry_the_schema_version() {
        let doc = DetectDoc {
            schema_version: SCHEMA_VERSION.into(),
            detector: "mi".into(),
            lambda: 1.0,
            decision: "H1".into(),
            statistic: 2.5,
        };
        let text = to_json(&doc).unwrap();
        assert!(text.contains("\"schema_version\": \"1\""));
        assert!(text.ends_with('\n'));
        let back: DetectDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
    }
}
