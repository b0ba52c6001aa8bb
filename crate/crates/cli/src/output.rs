//! Output plumbing: formats, tables, and sinks.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Aligned human-readable table.
    Table,
    /// Pretty-printed JSON.
    Json,
    /// Comma-separated values.
    Csv,
}

/// A titled rectangular result.
#[derive(Debug, Clone)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        Table {
            title: title.to_owned(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.title);
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", header.join("  "));
        let _ = writeln!(out, "{}", "-".repeat(header.join("  ").len()));
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  "));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Filesystem-friendly name derived from the title.
    pub fn slug(&self) -> String {
        self.title
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '-' })
            .collect::<String>()
            .split('-')
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Everything a command hands back: a JSON value for `--format json` and
/// tables for the text/CSV renderings.
pub struct CommandOutput {
    pub json: serde_json::Value,
    pub tables: Vec<Table>,
}

impl CommandOutput {
    pub fn new(json: serde_json::Value, tables: Vec<Table>) -> Self {
        CommandOutput { json, tables }
    }
}

/// Emit to stdout or to `--out`. For multi-table output with `--out`, the
/// path is treated as a directory and one file per table is written;
/// otherwise a single file.
pub fn emit(output: &CommandOutput, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        None => {
            print!("{}", render_all(output, format));
            Ok(())
        }
        Some(path) if output.tables.len() > 1 && format != Format::Json => {
            std::fs::create_dir_all(path)
                .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))?;
            let ext = match format {
                Format::Csv => "csv",
                _ => "txt",
            };
            let mut written: Vec<PathBuf> = vec![];
            for table in &output.tables {
                let file = path.join(format!("{}.{ext}", table.slug()));
                let body = match format {
                    Format::Csv => table.render_csv(),
                    _ => table.render_text(),
                };
                std::fs::write(&file, body)
                    .map_err(|e| CliError::Data(format!("cannot write {}: {e}", file.display())))?;
                written.push(file);
            }
            for file in written {
                println!("wrote {}", file.display());
            }
            Ok(())
        }
        Some(path) => {
            let body = render_all(output, format);
            std::fs::write(path, body)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn render_all(output: &CommandOutput, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output.json).expect("serializable");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut s = String::new();
            for (i, t) in output.tables.iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                s.push_str(&t.render_text());
            }
            s
        }
        Format::Csv => {
            let mut s = String::new();
            for (i, t) in output.tables.iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                if output.tables.len() > 1 {
                    let _ = writeln!(s, "# {}", t.title);
                }
                s.push_str(&t.render_csv());
            }
            s
        }
    }
}

/// Fixed-precision float for table cells; deterministic across runs.
pub fn fmt(v: f64) -> String {
    // Collapse negative zero so equal values render identically.
    let v = if v == 0.0 { 0.0 } else { v };
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        v.to_string()
    }
}

pub fn fmt_bool(v: bool) -> String {
    if v {
        "yes".into()
    } else {
        "no".into()
    }
}
