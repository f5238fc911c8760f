//! Tables rendered as text, CSV or JSON, and file/stdout plumbing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Int(u64),
    /// Arbitrary-precision integers stay strings in JSON.
    Big(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Big(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Big(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> = self
                            .headers
                            .iter()
                            .cloned()
                            .zip(r.iter().map(Cell::json))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                serde_json::to_string_pretty(&rows).expect("tables serialize") + "\n"
            }
            Format::Text => {
                let cells: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|r| r.iter().map(Cell::text).collect())
                    .collect();
                let widths: Vec<usize> = (0..self.headers.len())
                    .map(|i| {
                        cells
                            .iter()
                            .map(|r| r[i].len())
                            .chain([self.headers[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |vals: Vec<&str>| {
                    let parts: Vec<String> = vals
                        .iter()
                        .zip(&widths)
                        .map(|(v, w)| format!("{v:>w$}"))
                        .collect();
                    parts.join("  ") + "\n"
                };
                let mut out = line(self.headers.iter().map(String::as_str).collect());
                for r in &cells {
                    out += &line(r.iter().map(String::as_str).collect());
                }
                out
            }
        }
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::user(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| Failure::user(format!("cannot write {}: {e}", path.display())))
}

/// Writes the primary output to `out` or stdout.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|e| Failure::user(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Path of the timing sidecar next to a primary output file.
pub fn timing_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".timing.json");
    out.with_file_name(name)
}

/// Wall-clock times are kept out of the primary output so that it is
/// byte-identical across runs and worker counts.
pub fn emit_timing(
    out: Option<&Path>,
    total: Duration,
    per_n: &[(usize, Duration)],
) -> Result<(), Failure> {
    let Some(out) = out else {
        return Ok(());
    };
    let rows: Vec<Value> = per_n
        .iter()
        .map(|(n, d)| json!({"n": n, "elapsedMs": d.as_millis() as u64}))
        .collect();
    let v = json!({"elapsedMs": total.as_millis() as u64, "perN": rows});
    write_file(
        &timing_path(out),
        &(serde_json::to_string_pretty(&v).expect("json") + "\n"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(["n", "count"]);
        t.push(vec![Cell::Int(1), Cell::Big("2".into())]);
        t.push(vec![Cell::Int(10), Cell::Big("52".into())]);
        t
    }

    #[test]
    fn formats() {
        assert_eq!(table().render(Format::Csv), "n,count\n1,2\n10,52\n");
        assert_eq!(
            table().render(Format::Text),
            " n  count\n 1      2\n10     52\n"
        );
        let v: Value = serde_json::from_str(&table().render(Format::Json)).unwrap();
        assert_eq!(v[1]["n"], json!(10));
        assert_eq!(v[1]["count"], json!("52"));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            timing_path(Path::new("a/b.csv")),
            PathBuf::from("a/b.csv.timing.json")
        );
    }
}
