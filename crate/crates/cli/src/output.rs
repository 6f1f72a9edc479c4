//! Primary-output plumbing: CSV assembly and stdout/file writing.
//!
//! Numeric fields use Rust's shortest round-trip formatting, so every value
//! parses back to the identical f64 and output is byte-stable. Fields never
//! contain separators or quotes, so no RFC-4180 quoting is required.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

pub struct CsvTable {
    buf: String,
    columns: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        CsvTable {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Writes the primary output to `--out` or stdout.
pub fn write_text(out: &Option<PathBuf>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}
