use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// Bumped whenever a column or summary key changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

impl Cell {
    /// Floats carry 17 significant digits, enough to round-trip exactly.
    fn render(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            Self::Float(v) => format!("{v:.16e}"),
            Self::Bool(v) => v.to_string(),
            Self::Text(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a command produces: metadata, a summary and its tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub summary: Value,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str, config: Value, summary: Value, tables: Vec<Table>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            summary,
            tables,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::numerical("serialization", e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// `#` comment lines for metadata and summary, then each table as a
    /// header row and records, introduced by `# table=<name>`.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let ser = |e: &dyn std::fmt::Display| CliError::numerical("serialization", e.to_string());
        let mut out = format!("# ladder {} schema_version={}\n", self.command, self.schema_version);
        out.push_str(&format!("# config={}\n", serde_json::to_string(&self.config).map_err(|e| ser(&e))?));
        out.push_str(&format!("# summary={}\n", serde_json::to_string(&self.summary).map_err(|e| ser(&e))?));
        for table in &self.tables {
            out.push_str(&format!("# table={} rows={}\n", table.name, table.rows.len()));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.columns).map_err(|e| ser(&e))?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::render)).map_err(|e| ser(&e))?;
            }
            let bytes = w.into_inner().map_err(|e| ser(&e))?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| ser(&e))?);
        }
        Ok(out)
    }
}
