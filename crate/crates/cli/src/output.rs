use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use nni_core::TraceRecord;
use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::{CliError, Result};
use crate::experiment::ExperimentRun;

/// Column order of the CSV trace.
pub const TRACE_COLUMNS: [&str; 10] =
    ["k", "lambda", "r_norm", "rel_residual", "theta", "halvings", "min_u", "delta_norm", "delta_lambda", "energy"];

/// File at `path`, or stdout when `None`.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

/// Serializable rows as CSV with a header; `None` fields are left empty.
pub fn write_rows_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| CliError::Io { path: "<csv>".into(), source })?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], writer: W) -> Result<()> {
    if records.is_empty() {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRACE_COLUMNS)?;
        w.flush().map_err(|source| CliError::Io { path: "<csv>".into(), source })?;
        return Ok(());
    }
    write_rows_csv(records, writer)
}

pub fn trace_json(run: &ExperimentRun) -> serde_json::Value {
    let mut value = serde_json::json!({
        "config": run.config,
        "records": run.outcome.trace.records,
        "status": run.outcome.trace.status,
        "wall_time_seconds": run.wall_time_seconds,
    });
    if let Some(report) = &run.oracle {
        value["oracle"] = serde_json::json!(report);
    }
    value
}

pub fn write_run<W: Write>(run: &ExperimentRun, format: OutputFormat, mut writer: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_trace_csv(&run.outcome.trace.records, writer),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut writer, &trace_json(run))?;
            writeln!(writer).map_err(|source| CliError::Io { path: "<json>".into(), source })?;
            writer.flush().map_err(|source| CliError::Io { path: "<json>".into(), source })
        }
    }
}
