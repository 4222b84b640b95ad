use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

/// Renders rows as CSV with a header, or as a JSON array of objects with the
/// same fields. Floats use the shortest decimal that round-trips.
pub fn render<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Json => {
            let mut out = b"[\n".to_vec();
            for (i, row) in rows.iter().enumerate() {
                out.extend_from_slice(b"  ");
                serde_json::to_writer(&mut out, row).map_err(|e| CliError::Io(e.to_string()))?;
                out.extend_from_slice(if i + 1 < rows.len() { b",\n" } else { b"\n" });
            }
            out.extend_from_slice(b"]\n");
            Ok(out)
        }
    }
}

pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
