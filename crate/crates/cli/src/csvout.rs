//! CSV emission.
//!
//! Every file starts with one comment line naming the tool version,
//! the seed actually used, and the config hash, then a column header.
//! Numeric cells go through a finiteness gate: a NaN or infinity
//! aborts the run instead of landing in a file. Floats render with
//! the shortest round-trip representation, so identical values give
//! identical bytes.

use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

/// The provenance comment at the top of every output file.
pub fn header(seed: u64, config_hash: u64) -> String {
    format!(
        "# fadecap v{} seed={} config=fnv1a64:{:016x}",
        env!("CARGO_PKG_VERSION"),
        seed,
        config_hash
    )
}

/// One CSV cell. `Blank` renders as an empty field and is how absent
/// optional columns (no bound, no duality) appear.
pub enum Cell<'a> {
    Str(&'a str),
    Int(u64),
    Num(f64),
    Blank,
}

pub struct Table {
    columns: &'static [&'static str],
    lines: Vec<String>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table {
            columns,
            lines: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<()> {
        assert_eq!(cells.len(), self.columns.len(), "row shape");
        let mut fields = Vec::with_capacity(cells.len());
        for (cell, &column) in cells.iter().zip(self.columns) {
            fields.push(match cell {
                Cell::Str(s) => (*s).to_string(),
                Cell::Int(v) => v.to_string(),
                Cell::Num(v) => {
                    if !v.is_finite() {
                        return Err(CliError::NonFinite { column, value: *v });
                    }
                    format!("{v}")
                }
                Cell::Blank => String::new(),
            });
        }
        self.lines.push(fields.join(","));
        Ok(())
    }

    pub fn render(&self, header_line: &str) -> String {
        let mut out = String::new();
        out.push_str(header_line);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
