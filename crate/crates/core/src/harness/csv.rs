//! Trace CSV emission and parsing.

use std::io::{Read, Write};

use csv::{ReaderBuilder, Terminator, WriterBuilder};

use crate::diagnostics::TraceRecord;
use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 13] = [
    "iter",
    "f_raw",
    "loss",
    "grad_norm",
    "dt_used",
    "alpha",
    "eta_min",
    "eta_max",
    "r_min",
    "r_max",
    "modified_energy",
    "dissipation_margin",
    "proposal_event",
];

/// Shortest representation that parses back to the same `f64`; scientific
/// notation outside [1e-4, 1e15).
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::config(format!("csv: {e}"))
}

pub fn write_trace<W: Write>(out: W, trace: &[TraceRecord]) -> Result<()> {
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_HEADER).map_err(io_err)?;
    for r in trace {
        w.write_record([
            r.iter.to_string(),
            format_real(r.f_raw),
            format_real(r.loss),
            format_real(r.grad_norm),
            format_real(r.dt_used),
            opt(r.alpha),
            opt(r.eta_min),
            opt(r.eta_max),
            opt(r.r_min),
            opt(r.r_max),
            opt(r.modified_energy),
            opt(r.dissipation_margin),
            r.proposal_event.clone().unwrap_or_default(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn trace_to_string(trace: &[TraceRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace)?;
    String::from_utf8(buf).map_err(io_err)
}

fn real(field: &str, row: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::config_at(row, format!("'{field}' is not a number")))
}

fn opt_real(field: &str, row: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        real(field, row).map(Some)
    }
}

/// Parses a trace written by [`write_trace`]; `line` in errors is the CSV line number.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rd = ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers().map_err(io_err)?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::config_at(1, "unexpected trace header"));
    }
    let mut trace = Vec::new();
    for (k, row) in rd.records().enumerate() {
        let line = k + 2;
        let row = row.map_err(io_err)?;
        let f = |i: usize| row.get(i).unwrap_or("");
        trace.push(TraceRecord {
            iter: f(0)
                .parse()
                .map_err(|_| Error::config_at(line, format!("bad iteration '{}'", f(0))))?,
            f_raw: real(f(1), line)?,
            loss: real(f(2), line)?,
            grad_norm: real(f(3), line)?,
            dt_used: real(f(4), line)?,
            alpha: opt_real(f(5), line)?,
            eta_min: opt_real(f(6), line)?,
            eta_max: opt_real(f(7), line)?,
            r_min: opt_real(f(8), line)?,
            r_max: opt_real(f(9), line)?,
            modified_energy: opt_real(f(10), line)?,
            dissipation_margin: opt_real(f(11), line)?,
            proposal_event: Some(f(12).to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(trace)
}
