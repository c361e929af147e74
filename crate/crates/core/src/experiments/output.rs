use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::OutputFormat;
use crate::error::{Error, Result};

/// Long-format result table with free-form metadata.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub meta: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            meta: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn cell(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            other => other.to_string(),
        }
    }

    /// CSV with one `# key = value` line per metadata entry before the header.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {v}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.columns)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Self::cell))?;
        }
        csv.flush()
    }

    pub fn file_name(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => format!("{}.csv", self.name),
            OutputFormat::Json => format!("{}.json", self.name),
        }
    }

    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        let path = dir.join(self.file_name(format));
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        match format {
            OutputFormat::Csv => self.write_csv(&mut w).map_err(|e| Error::io(&path, e))?,
            OutputFormat::Json => serde_json::to_writer_pretty(&mut w, self)?,
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// One verdict in `checks.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub passed: bool,
    /// Reported for reference only; not part of the run's verdict.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value: Some(value),
            threshold: Some(threshold),
            passed: value < threshold,
            informational: false,
            note: None,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            passed: value >= threshold,
            ..Self::below(name, value, threshold)
        }
    }

    pub fn flag(name: &str, passed: bool, note: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            value: None,
            threshold: None,
            passed,
            informational: false,
            note: Some(note.into()),
        }
    }

    pub fn informational(mut self, yes: bool) -> Self {
        self.informational = yes;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_has_metadata_header() {
        let mut t = Table::new("p", &["t", "site", "value"]).meta("lambda", 0.5).meta("kind", "dimer1i");
        t.push(vec![json!(0.0), json!(3), json!(0.25)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "# kind = \"dimer1i\"\n# lambda = 0.5\nt,site,value\n0.0,3,0.25\n");
    }

    #[test]
    fn check_verdicts() {
        assert!(Check::below("a", 1e-13, 1e-12).passed);
        assert!(!Check::below("a", 1e-12, 1e-12).passed);
        assert!(Check::at_least("f", 0.99, 0.99).passed);
    }
}
