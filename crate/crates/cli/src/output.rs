//! CSV emission: one comment row with the config hash and seed, then a header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Identifies the run in every file it writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStamp {
    pub config_hash: String,
    pub seed: u64,
}

pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    columns: usize,
    rows: usize,
}

impl CsvSink {
    pub fn create(dir: &Path, name: &str, header: &[&str], stamp: &RunStamp) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut buf = BufWriter::new(file);
        writeln!(buf, "# config_hash={},seed={}", stamp.config_hash, stamp.seed).map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
        writer.write_record(header)?;
        Ok(CsvSink { path, writer, columns: header.len(), rows: 0 })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let record: Vec<S> = fields.into_iter().collect();
        debug_assert_eq!(record.len(), self.columns, "row width differs from header in {}", self.path.display());
        self.writer.write_record(record)?;
        self.rows += 1;
        Ok(())
    }

    /// Flushes and returns the path and data-row count.
    pub fn finish(mut self) -> Result<(PathBuf, usize)> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok((self.path, self.rows))
    }
}

/// Shortest round-trip text; scientific notation outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}
