use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::failure::{CliResult, Failure};

/// Creates `dir` and truncates each named file in it, so unwritable
/// destinations are reported before any computation starts.
pub fn prepare(dir: &Path, names: &[&str]) -> CliResult<Vec<File>> {
    fs::create_dir_all(dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
    names
        .iter()
        .map(|name| {
            let path = dir.join(name);
            File::create(&path).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
        })
        .collect()
}

pub fn write_json<T: Serialize>(file: File, value: &T) -> CliResult<()> {
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::data(format!("writing JSON: {e}")))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| Failure::data(format!("writing JSON: {e}")))
}
