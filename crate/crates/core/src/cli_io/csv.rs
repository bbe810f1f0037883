//! Diagnostics CSV: header `t,E,V2,Lbp,A2,P_f,P_damp,dEdt,umax`, one row per
//! record, values in `%.16e` form (17 significant digits, exact round trip).
//!
//! Files are written under `<name>.partial` and renamed on completion, so an
//! aborted run leaves the marker behind instead of a truncated file.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{three_point_rate, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::integrator::{Flow, Observer, Physics, SolverState, Stride};

pub fn header() -> String {
    DiagnosticsRecord::COLUMNS.join(",")
}

pub fn format_row(r: &DiagnosticsRecord) -> String {
    r.values()
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

/// Writes a complete file in one go.
pub fn write_diagnostics(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut w = CsvWriter::create(path)?;
    for r in records {
        w.write_row(r)?;
    }
    w.finish()
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad =
        |line: usize, msg: String| Error::Precondition(format!("{}:{line}: {msg}", path.display()));
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| bad(1, "empty file".into()))?;
    if first != header() {
        return Err(bad(1, format!("unexpected header {first:?}")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(i + 2, e.to_string()))?;
        let values: [f64; 9] = fields
            .try_into()
            .map_err(|v: Vec<f64>| bad(i + 2, format!("expected 9 fields, got {}", v.len())))?;
        out.push(DiagnosticsRecord::from_values(values));
    }
    Ok(out)
}

/// Row-at-a-time writer behind a `.partial` marker.
pub struct CsvWriter {
    out: BufWriter<File>,
    partial: PathBuf,
    path: PathBuf,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let partial = partial_path(path);
        let file = File::create(&partial).map_err(|e| Error::io(&partial, e))?;
        let mut w = CsvWriter {
            out: BufWriter::new(file),
            partial,
            path: path.to_path_buf(),
        };
        let h = header();
        w.line(&h)?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| Error::io(&self.partial, e))
    }

    pub fn write_row(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        self.line(&format_row(r))
    }

    /// Flushes and moves the file to its final name.
    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.partial, e))?;
        self.out
            .get_ref()
            .sync_all()
            .map_err(|e| Error::io(&self.partial, e))?;
        fs::rename(&self.partial, &self.path).map_err(|e| Error::io(&self.path, e))
    }
}

/// Observer that records diagnostics and streams them to a CSV file.
///
/// Rows lag one record behind so that `dEdt` carries the same centered
/// stencil as [`crate::diagnostics::fill_energy_rate`]; [`finish`](Self::finish)
/// writes the tail and returns every record.
pub struct CsvRecorder {
    stride: Stride,
    writer: CsvWriter,
    records: Vec<DiagnosticsRecord>,
    written: usize,
}

impl CsvRecorder {
    pub fn create(path: &Path, stride: Stride) -> Result<Self> {
        Ok(CsvRecorder {
            stride,
            writer: CsvWriter::create(path)?,
            records: Vec::new(),
            written: 0,
        })
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    fn emit(&mut self, upto: usize) -> Result<()> {
        let n = self.records.len();
        while self.written < upto {
            let i = self.written;
            self.records[i].dedt = match n {
                1 => 0.0,
                2 => {
                    (self.records[1].e - self.records[0].e)
                        / (self.records[1].t - self.records[0].t)
                }
                _ if i == 0 => three_point_rate(&self.records[..3], 0),
                _ if i == n - 1 => three_point_rate(&self.records[n - 3..], 2),
                _ => three_point_rate(&self.records[i - 1..i + 2], 1),
            };
            let r = self.records[i];
            self.writer.write_row(&r)?;
            self.written += 1;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<Vec<DiagnosticsRecord>> {
        let n = self.records.len();
        self.emit(n)?;
        self.writer.finish()?;
        Ok(self.records)
    }
}

impl Observer for CsvRecorder {
    fn stride(&self) -> Stride {
        self.stride
    }

    fn observe(&mut self, state: &SolverState, physics: &Physics) -> Result<Flow> {
        if self.records.last().is_some_and(|r| r.t == state.t) {
            return Ok(Flow::Continue);
        }
        self.records
            .push(crate::diagnostics::record(&state.u, state.t, physics)?);
        let n = self.records.len();
        if n >= 3 {
            self.emit(n - 1)?;
        }
        Ok(Flow::Continue)
    }
}
