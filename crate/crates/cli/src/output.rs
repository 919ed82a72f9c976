//! Output directory writers and human-readable tables.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use npchange::export::format_sig;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// One writer per artifact inside an output directory.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes `name` (which may include one subdirectory) through `fill`.
    pub fn write_with(
        &self,
        name: &str,
        fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> CliResult<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        fill(&mut out)
            .and_then(|()| out.flush())
            .map_err(|e| CliError::io(&path, e))
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<()> {
        self.write_with(name, |out| out.write_all(text.as_bytes()))
    }

    /// One JSON object per line, fields in declaration order.
    pub fn write_jsonl<T: Serialize>(&self, name: &str, records: &[T]) -> CliResult<()> {
        self.write_with(name, |out| {
            for r in records {
                serde_json::to_writer(&mut *out, r).map_err(std::io::Error::other)?;
                out.write_all(b"\n")?;
            }
            Ok(())
        })
    }
}

/// Four significant digits, as in the summaries.
pub fn sig(v: f64) -> String {
    format_sig(v, 4)
}

pub fn sig_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), sig)
}

/// Right-aligned columns separated by two spaces.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut text = line(headers.to_vec());
    for row in rows {
        text.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    text
}
