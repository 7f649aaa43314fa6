//! CSV tables, JSON sidecars and the per-run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::point::Point;

/// One CSV cell. Floats carry 17 significant digits.
#[derive(Clone, Debug)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format_float(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Column names `x{k}_re, x{k}_im` for `n` coordinates.
pub fn point_columns(n: usize) -> Vec<String> {
    (0..n).flat_map(|k| [format!("x{k}_re"), format!("x{k}_im")]).collect()
}

pub fn point_cells(p: &Point) -> Vec<Cell> {
    p.coords().iter().flat_map(|c| [Cell::F(c.re), Cell::F(c.im)]).collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    plan_hash: &'a str,
    tool_version: &'a str,
    duration_seconds: f64,
    artifacts: &'a [String],
}

/// Writes artifacts named `<command>-<hash>[-suffix].<ext>` into a directory
/// and finishes with a manifest listing them.
pub struct Artifacts {
    dir: PathBuf,
    command: String,
    hash: String,
    started: Instant,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str, hash: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            command: command.into(),
            hash: hash.into(),
            started: Instant::now(),
            written: Vec::new(),
        })
    }

    fn name(&self, suffix: &str, ext: &str) -> String {
        if suffix.is_empty() {
            format!("{}-{}.{ext}", self.command, self.hash)
        } else {
            format!("{}-{}-{suffix}.{ext}", self.command, self.hash)
        }
    }

    pub fn csv(&mut self, suffix: &str, table: &Table) -> Result<PathBuf> {
        let name = self.name(suffix, "csv");
        let path = self.dir.join(&name);
        table.write(&path)?;
        log::info!("wrote {}", path.display());
        self.written.push(name);
        Ok(path)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, suffix: &str, value: &T) -> Result<PathBuf> {
        let name = self.name(suffix, "json");
        let path = self.dir.join(&name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        log::info!("wrote {}", path.display());
        self.written.push(name);
        Ok(path)
    }

    /// Manifest with plan hash, tool version and wall-clock duration.
    pub fn finish(self) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}-{}.manifest.json", self.command, self.hash));
        let m = Manifest {
            command: &self.command,
            plan_hash: &self.hash,
            tool_version: env!("CARGO_PKG_VERSION"),
            duration_seconds: self.started.elapsed().as_secs_f64(),
            artifacts: &self.written,
        };
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
