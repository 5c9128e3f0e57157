//! CSV input and number formatting for the command outputs.

use std::io::{Read, Write};
use std::path::Path;

use mvspacings::Dataset;

use crate::CliError;

/// Reads a numeric CSV, skipping a single header row when the first row has
/// any field that is not a number.
pub fn read_points(path: &Path) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    read_points_from(file, &path.display().to_string())
}

pub fn read_points_from<R: Read>(reader: R, name: &str) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{name}: {e}")))?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        if k == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let row_id = rows.len() + 1;
        let mut row = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Input(format!(
                    "{name}: row {row_id} (line {line}), column {}: '{field}' is not a number",
                    c + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!(
                    "{name}: row {row_id} (line {line}), column {}: value must be finite",
                    c + 1
                )));
            }
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(p) if p != row.len() => {
                return Err(CliError::Input(format!(
                    "{name}: row {row_id} (line {line}) has {} columns, expected {p}",
                    row.len()
                )))
            }
            Some(_) => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{name}: no data rows")));
    }
    Dataset::from_rows(&rows).map_err(|e| CliError::Input(format!("{name}: {e}")))
}

/// `v` rounded to `digits` significant digits, printed in shortest form.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, v)
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}

/// A CSV writer over `out` with the given header.
pub fn csv_writer<'a, W: Write>(out: &'a mut W, header: &[&str]) -> Result<csv::Writer<&'a mut W>, CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(CliError::io)?;
    Ok(w)
}
