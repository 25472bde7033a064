use std::fmt::Write as _;
use std::path::Path;

use super::Format;
use crate::error::{Error, Result};
use crate::repr_diag::SimilarityMatrix;

/// A small table rendered either as CSV or as `key=value` lines.
pub(super) struct Emit {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Emit {
    pub(super) fn new(header: &[&str]) -> Self {
        Emit {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Two-column key/value table.
    pub(super) fn rows(rows: &[(String, String)]) -> Self {
        let mut e = Emit::new(&["key", "value"]);
        for (k, v) in rows {
            e.push(vec![k.clone(), v.clone()]);
        }
        e
    }

    pub(super) fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub(super) fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = csv_line(&self.header);
                for r in &self.rows {
                    out.push_str(&csv_line(r));
                }
                out
            }
            Format::Text if self.header.len() == 2 && self.header[0] == "key" => {
                let pairs: Vec<(String, String)> = self.rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
                kv(&pairs)
            }
            Format::Text => {
                let mut out = String::new();
                for r in &self.rows {
                    for (h, v) in self.header.iter().zip(r).skip(1) {
                        let _ = writeln!(out, "{}.{h}={v}", r[0]);
                    }
                }
                out
            }
        }
    }

    /// Key/value tables as a single CSV row with keys as the header.
    pub(super) fn render_wide(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let keys: Vec<String> = self.rows.iter().map(|r| r[0].clone()).collect();
                let vals: Vec<String> = self.rows.iter().map(|r| r[1].clone()).collect();
                csv_line(&keys) + &csv_line(&vals)
            }
            Format::Text => self.render(Format::Text),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

pub(super) fn kv(rows: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

pub(super) fn matrix_text(m: &SimilarityMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.n() {
        for j in 0..m.n() {
            let _ = writeln!(out, "{}:{}={}", m.labels[i], m.labels[j], m.get(i, j));
        }
    }
    out
}

pub(super) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
