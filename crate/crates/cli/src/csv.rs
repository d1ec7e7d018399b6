//! Minimal CSV writing: numbers use the shortest round-trip decimal form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Shortest decimal that parses back to the same `f64`, in positional form
/// for moderate magnitudes and exponent form otherwise.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn opt_int(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One `key=value` pair per field, space separated.
pub fn finding(pairs: &[(&str, String)]) -> String {
    let mut line = String::new();
    for (i, (k, v)) in pairs.iter().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        let _ = write!(line, "{k}={v}");
    }
    line.push('\n');
    line
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Reads a CSV written by this tool into a header and rows of fields.
pub fn read(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty file", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .enumerate()
        .map(|(i, l)| {
            let fields: Vec<String> = l.split(',').map(str::to_string).collect();
            if fields.len() != header.len() {
                return Err(CliError::Data(format!(
                    "{}: row {} has {} fields, header has {}",
                    path.display(),
                    i + 2,
                    fields.len(),
                    header.len()
                )));
            }
            Ok(fields)
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}
