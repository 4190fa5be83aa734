//! CSV persistence of diagnostics series.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: bad value `{value}`")]
    Value { row: usize, value: String },
}

/// Writes `# key = value` comment lines followed by the header row and one
/// row per record. Numbers use the shortest representation that parses
/// back to the same `f64`.
pub fn write_diagnostics_csv(
    mut out: impl Write,
    comments: &[(String, String)],
    records: &[DiagnosticsRecord],
) -> Result<(), CsvError> {
    for (k, v) in comments {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DiagnosticsRecord::COLUMNS)?;
    for r in records {
        w.write_record(r.values().iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file produced by [`write_diagnostics_csv`]; `#` lines are
/// skipped.
pub fn read_diagnostics_csv(input: impl BufRead) -> Result<Vec<DiagnosticsRecord>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != DiagnosticsRecord::COLUMNS {
        return Err(CsvError::Header(header));
    }
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let mut values = [0.0; 16];
        for (slot, field) in values.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|_| CsvError::Value {
                row: row + 1,
                value: field.to_string(),
            })?;
        }
        out.push(DiagnosticsRecord::from_values(values));
    }
    Ok(out)
}
