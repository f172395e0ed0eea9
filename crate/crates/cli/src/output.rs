use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Plain comma-separated rows; fields never contain commas or quotes.
pub fn write_csv_rows<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        writeln!(w, "{}", row.as_ref().join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Runs a writer-based exporter from the core crate against a file.
pub fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> qds_core::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).map_err(|e| match e {
        qds_core::QdsError::Io(source) => CliError::io(path, source),
        qds_core::QdsError::Csv(e) => CliError::io(path, std::io::Error::other(e.to_string())),
        other => CliError::Config(other.to_string()),
    })?;
    w.flush().map_err(|e| CliError::io(path, e))
}
