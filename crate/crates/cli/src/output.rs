use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

/// 17 significant digits in scientific notation, `1.0000000000000000e0`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV written row by row into a temporary file next to the target, moved
/// into place by [`CsvSink::finish`]. Dropping the sink without finishing
/// (e.g. on error) leaves no file behind.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<NamedTempFile>>,
    width: usize,
    rows: usize,
}

impl CsvSink {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let io = |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir).map_err(io)?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(tmp));
        writer.write_record(header).map_err(|e| io(e.into()))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
            width: header.len(),
            rows: 0,
        })
    }

    pub fn write_row(&mut self, cells: &[Cell]) -> Result<(), CliError> {
        assert_eq!(cells.len(), self.width, "row width does not match header");
        let mut fields = Vec::with_capacity(cells.len());
        for c in cells {
            fields.push(match *c {
                Cell::Int(v) => v.to_string(),
                Cell::Real(v) if v.is_finite() => format_real(v),
                Cell::Real(v) => {
                    return Err(CliError::Numerical(format!(
                        "non-finite value {v} in row {} of {}",
                        self.rows + 1,
                        self.path.display()
                    )))
                }
            });
        }
        self.writer
            .write_record(&fields)
            .map_err(|e| CliError::Io {
                path: self.path.clone(),
                source: e.into(),
            })?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(self) -> Result<usize, CliError> {
        let io = |source| CliError::Io {
            path: self.path.clone(),
            source,
        };
        let buf = self.writer.into_inner().map_err(|e| io(e.into_error()))?;
        let tmp = buf.into_inner().map_err(|e| io(e.into_error()))?;
        tmp.persist(&self.path).map_err(|e| io(e.error))?;
        Ok(self.rows)
    }
}

/// Sidecar path: the CSV path with a `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let p = csv.with_extension("json");
    if p == csv {
        let mut s = csv.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    } else {
        p
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| io(e.into()))?;
    f.write_all(b"\n").map_err(io)?;
    f.flush().map_err(io)
}
