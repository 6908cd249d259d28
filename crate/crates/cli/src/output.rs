//! CSV emission: one '#'-prefixed metadata block, a header row, data rows.
//!
//! Floats render through Rust's shortest round-trip formatting, so a fixed
//! scenario and seed always produce byte-identical files.

use crate::app::AppResult;
use std::io::Write;
use std::path::Path;

pub struct CsvDoc {
    meta: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new(command: &str, columns: Vec<&'static str>) -> Self {
        let mut doc = Self {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        };
        doc.meta("tool", format!("g2guard {}", env!("CARGO_PKG_VERSION")));
        doc.meta("command", command);
        doc
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Write to `path`, or stdout when no path is given.
    pub fn emit(&self, path: Option<&Path>) -> AppResult<()> {
        let text = self.render();
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(p, text)?;
            }
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }
}

/// Shortest round-trip decimal representation ('.' decimal separator).
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => num(v),
        None => "nan".to_string(),
    }
}
