//! Tables and their CSV / JSON rendering.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, e.g. `ratios`.
    pub name: String,
    /// One-line description printed above the header.
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Large tables (grid dumps) go to files only.
    pub bulk: bool,
}

impl Table {
    pub fn new(name: &str, title: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            bulk: false,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).map_err(std::io::Error::from)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(std::io::Error::from)?;
                }
                let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
                    .expect("csv output is utf-8");
                Ok(format!("# {}\n{body}", self.title))
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        self.columns
                            .iter()
                            .cloned()
                            .zip(r.iter().map(|c| serde_json::to_value(c).expect("cell serialises")))
                            .collect()
                    })
                    .collect();
                let doc = serde_json::json!({ "table": self.name, "title": self.title, "rows": rows });
                Ok(serde_json::to_string_pretty(&doc).expect("json serialises") + "\n")
            }
        }
    }
}

/// Tables produced by one command plus any tolerance breaches.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub tables: Vec<Table>,
    pub breaches: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.breaches.push(what.into());
        }
    }

    /// Print non-bulk tables to `out`; with a directory, write every table
    /// to `<dir>/<command>_<table>.<ext>`.
    pub fn emit(&self, format: Format, dir: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d)?;
        }
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let mut first = true;
        for t in &self.tables {
            let text = t.render(format)?;
            if let Some(d) = dir {
                std::fs::write(d.join(format!("{}_{}.{ext}", self.command, t.name)), &text)?;
            }
            if !t.bulk {
                if !first {
                    writeln!(out)?;
                }
                out.write_all(text.as_bytes())?;
                first = false;
            }
        }
        Ok(())
    }
}
