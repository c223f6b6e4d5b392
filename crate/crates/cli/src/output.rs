//! Result tables, their CSV and JSON renderings, and atomic file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::cli::Format;
use crate::Failure;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    /// 17 significant digits so doubles round-trip.
    fn render(&self) -> String {
        match self {
            Cell::Num(x) if *x == 0.0 => format!("{:.16e}", 0.0),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// What a command produces: one table, scalar summaries for the terminal
/// and the manifest, optional structured detail for JSON output, and
/// warnings about flagged numerics.
#[derive(Debug, Default)]
pub struct Outcome {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: BTreeMap<String, Value>,
    pub detail: Option<Value>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// A `# config_hash=` line, then an RFC 4180 table.
    pub fn to_csv(&self, hash: &str) -> Result<Vec<u8>, Failure> {
        let mut buf = format!("# config_hash={hash}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| Failure::Numerical(format!("csv rendering failed: {e}"));
            w.write_record(&self.columns).map_err(io)?;
            for r in &self.rows {
                w.write_record(r.iter().map(Cell::render)).map_err(io)?;
            }
            w.flush().map_err(|e| Failure::Numerical(format!("csv rendering failed: {e}")))?;
        }
        Ok(buf)
    }

    pub fn to_json(&self, hash: &str, config: &Value) -> Vec<u8> {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
        let doc = json!({
            "config_hash": hash,
            "config": config,
            "columns": self.columns,
            "rows": rows,
            "summary": self.summary,
            "detail": self.detail,
        });
        let mut out = serde_json::to_vec_pretty(&doc).expect("json renders");
        out.push(b'\n');
        out
    }

    pub fn render(&self, format: Format, hash: &str, config: &Value) -> Result<Vec<u8>, Failure> {
        match format {
            Format::Csv => self.to_csv(hash),
            Format::Json => Ok(self.to_json(hash, config)),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Writes to a temporary file in the target directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: std::io::Error| Failure::Io(format!("cannot write {}: {e}", path.display()));
    fs::create_dir_all(&dir).map_err(fail)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
