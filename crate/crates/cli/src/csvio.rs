//! Trace and summary CSV files.

use std::io::{Read, Write};

use kmlqg::bench::SummaryRow;
use kmlqg::optimizer::IterationRecord;

use crate::CliError;

pub const TRACE_HEADER: &str = "iter,cost,grad_norm,step,gap,wall_ms";
pub const SUMMARY_HEADER: &str = "system,algorithm,iters_to_1e-6,final_gap,wall_ms";

/// Seventeen significant digits: exact round trip for every finite `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn io_error(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

pub fn write_trace<W: Write>(records: &[IterationRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(TRACE_HEADER.split(',')).map_err(io_error)?;
    for r in records {
        w.write_record([
            r.iter.to_string(),
            format_real(r.cost),
            format_real(r.grad_norm),
            format_real(r.step),
            optional(r.gap),
            format_real(r.wall_ms),
        ])
        .map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn trace_to_string(records: &[IterationRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

fn parse_field<T: std::str::FromStr>(field: &str, what: &str, line: usize) -> Result<T, CliError> {
    field
        .parse()
        .map_err(|_| CliError::Parse(format!("line {line}: bad {what} '{field}'")))
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &str) -> Result<(), CliError> {
    let header = reader
        .headers()
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let got: Vec<&str> = header.iter().collect();
    if got.join(",") != expected {
        return Err(CliError::Parse(format!(
            "unexpected header '{}'",
            got.join(",")
        )));
    }
    Ok(())
}

/// Inverse of [`write_trace`].
pub fn read_trace<R: Read>(input: R) -> Result<Vec<IterationRecord>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    check_header(&mut reader, TRACE_HEADER)?;
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Parse(e.to_string()))?;
        let line = i + 2;
        let gap = match &row[4] {
            "" => None,
            s => Some(parse_field(s, "gap", line)?),
        };
        records.push(IterationRecord {
            iter: parse_field(&row[0], "iter", line)?,
            cost: parse_field(&row[1], "cost", line)?,
            grad_norm: parse_field(&row[2], "grad_norm", line)?,
            step: parse_field(&row[3], "step", line)?,
            gap,
            wall_ms: parse_field(&row[5], "wall_ms", line)?,
        });
    }
    Ok(records)
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(SUMMARY_HEADER.split(','))
        .map_err(io_error)?;
    for r in rows {
        w.write_record([
            r.system.clone(),
            r.algorithm.clone(),
            r.iters_to_target.map(|i| i.to_string()).unwrap_or_default(),
            optional(r.final_gap),
            optional(r.wall_ms),
        ])
        .map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

/// Inverse of [`write_summary`].
pub fn read_summary<R: Read>(input: R) -> Result<Vec<SummaryRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    check_header(&mut reader, SUMMARY_HEADER)?;
    let mut rows = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Parse(e.to_string()))?;
        let line = i + 2;
        let opt_real = |s: &str, what: &str| -> Result<Option<f64>, CliError> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_field(s, what, line).map(Some)
            }
        };
        rows.push(SummaryRow {
            system: row[0].to_string(),
            algorithm: row[1].to_string(),
            iters_to_target: match &row[2] {
                "" => None,
                s => Some(parse_field(s, "iters_to_1e-6", line)?),
            },
            final_gap: opt_real(&row[3], "final_gap")?,
            wall_ms: opt_real(&row[4], "wall_ms")?,
        });
    }
    Ok(rows)
}
