//! Plain-text vector files: one value per line, nothing else. The format is
//! deliberately primitive so any plotting or scripting tool can produce and
//! consume it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_owned()))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

/// Reads a real-valued sequence: one finite float per line, blank lines
/// ignored.
pub fn read_reals(path: &Path) -> Result<Vec<f64>, CliError> {
    read_lines(path)?
        .into_iter()
        .map(|(line, text)| {
            let v: f64 = text.parse().map_err(|_| {
                CliError::Data(format!("{}:{line}: not a float: {text:?}", path.display()))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{}:{line}: value must be finite",
                    path.display()
                )));
            }
            Ok(v)
        })
        .collect()
}

/// Reads a watermark sequence: one `+1` or `-1` per line, nothing else.
pub fn read_watermark(path: &Path) -> Result<Vec<i8>, CliError> {
    read_lines(path)?
        .into_iter()
        .map(|(line, text)| match text.as_str() {
            "1" | "+1" => Ok(1),
            "-1" => Ok(-1),
            other => Err(CliError::Data(format!(
                "{}:{line}: watermark entries must be +1 or -1, got {other:?}",
                path.display()
            ))),
        })
        .collect()
}

/// Formats a real-valued sequence for writing: shortest round-trip decimal,
/// one value per line, trailing newline.
pub fn format_reals(values: &[f64]) -> String {
    let mut out = String::new();
    for v in values {
        writeln!(out, "{v}").expect("writing to a String cannot fail");
    }
    out
}
