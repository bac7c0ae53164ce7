//! JSON and file helpers.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use exarc_core::lab::SpectralDataset;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Create `dir` if needed and return `dir/name`.
pub fn output_path(dir: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.join(name))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn write_dataset(path: &Path, dataset: &SpectralDataset) -> CliResult<()> {
    write_json(path, dataset)
}

/// Read and validate a dataset. Malformed JSON and shape errors are
/// configuration errors; a missing file is an I/O error.
pub fn read_dataset(path: &Path) -> CliResult<SpectralDataset> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let ds: SpectralDataset = serde_json::from_reader(BufReader::new(file)).map_err(|e| {
        if e.is_io() {
            CliError::io(path, e.into())
        } else {
            CliError::Config(format!("{}: {e}", path.display()))
        }
    })?;
    ds.validate()?;
    Ok(ds)
}
