//! Run reports. Everything is kept in sorted maps and floats are printed in
//! shortest round-trip form, so equal inputs give byte-identical output.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rows of a data table such as a bench sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            config: BTreeMap::new(),
            metrics: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            results: Value::Null,
            table: None,
        }
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.config.insert(key.to_string(), serde_json::to_value(value).expect("plain data"));
        self
    }

    pub fn metric(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("plain data") + "\n",
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => self.key_value_csv(),
            },
        }
    }

    /// `section,key,value` rows for the command, config, metrics and
    /// artifacts; `results` has no flat form and is left out.
    fn key_value_csv(&self) -> String {
        let mut out = String::from("section,key,value\n");
        let mut row = |section: &str, key: &str, value: String| {
            out.push_str(&format!("{section},{},{}\n", quote(key), quote(&value)));
        };
        row("command", "name", self.command.clone());
        for (k, v) in &self.config {
            row("config", k, plain(v));
        }
        for (k, v) in &self.metrics {
            row("metrics", k, plain(&Value::from(*v)));
        }
        for (k, v) in &self.artifacts {
            row("artifacts", k, v.clone());
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    quote(&plain(v))
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
