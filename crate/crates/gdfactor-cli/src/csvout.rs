//! CSV output with a self-describing header block: `#` metadata lines
//! (tool version, subcommand, master seed, effective config), one `# col`
//! doc line per column, then the header row and data rows. Floats are
//! written with Rust's shortest round-trip formatting so files are
//! byte-stable across runs and platforms, and a `f64` parse of any cell
//! recovers the exact computed value.

use std::fmt;
use std::path::Path;

use crate::config::ConfigMap;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    U64(u64),
    Usize(usize),
    F64(f64),
    Str(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::U64(v) => write!(f, "{v}"),
            Cell::Usize(v) => write!(f, "{v}"),
            Cell::F64(v) => write!(f, "{v}"),
            Cell::Str(v) => write!(f, "{v}"),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U64(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Usize(v)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F64(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    meta: Vec<(String, String)>,
    columns: Vec<(String, String)>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    /// Starts a table stamped with the tool version, the subcommand, the
    /// master seed, and the full effective config (file values plus flag
    /// overrides), so the file alone reproduces the run.
    pub fn for_run(subcommand: &str, master_seed: u64, config: &ConfigMap) -> Self {
        let mut t = CsvTable::default();
        t.meta("tool", format!("gdfactor v{}", env!("CARGO_PKG_VERSION")));
        t.meta("subcommand", subcommand);
        t.meta("master_seed", master_seed);
        for (k, v) in config.entries() {
            t.meta("config", format!("{k} = {v}"));
        }
        t
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    /// Declares a column; every column carries a one-line doc emitted as a
    /// `# col name: doc` header line.
    pub fn column(&mut self, name: &str, doc: &str) {
        assert!(
            !name.contains(',') && !name.contains('\n'),
            "column name must be a bare identifier"
        );
        self.columns.push((name.to_string(), doc.to_string()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "row width must match the declared columns"
        );
        for cell in &cells {
            if let Cell::Str(s) = cell {
                assert!(
                    !s.contains(',') && !s.contains('\n') && !s.contains('"'),
                    "string cells must not need quoting"
                );
            }
        }
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        for (name, doc) in &self.columns {
            out.push_str(&format!("# col {name}: {doc}\n"));
        }
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
    }
}
