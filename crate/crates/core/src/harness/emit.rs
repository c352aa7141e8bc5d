use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::config::OutputFormat;
use crate::harness::sweep::SweepRecord;

pub const CSV_HEADER: &str = "solver,n_tx,power_dbm,crb_trace,iterations,wall_time_ms,trial,seed,status";

/// Writes `records` to any writer. CSV leaves `crb_trace` empty for failed
/// runs; JSON writes `null`.
pub fn write_records<W: Write>(records: &[SweepRecord], format: OutputFormat, out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    let ser = |e: String| Error::Serialization { path: "<stream>".into(), message: e };
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r).map_err(|e| ser(e.to_string()))?;
            }
            w.flush().map_err(|e| ser(e.to_string()))?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records).map_err(|e| ser(e.to_string()))?;
            writeln!(out).map_err(|e| ser(e.to_string()))?;
        }
    }
    Ok(())
}

pub fn emit(records: &[SweepRecord], format: OutputFormat, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    let file = File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut writer = BufWriter::new(file);
    write_records(records, format, &mut writer).map_err(|e| match e {
        Error::Serialization { message, .. } => Error::Serialization { path: path.to_path_buf(), message },
        other => other,
    })?;
    writer.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
