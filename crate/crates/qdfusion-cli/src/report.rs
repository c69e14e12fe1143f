// Copyright 2026 The qdfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Report model and its CSV/JSON renderings.
//!
//! CSV output starts with `#`-prefixed metadata lines, then a `quantity,value`
//! summary table, then one block per table introduced by `# table: <name>`.
//! Blocks are separated by blank lines. JSON output carries the same values.

use serde_json::{json, Map, Value as Json};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Num(x) => format!("{x}"),
            Value::Int(i) => i.to_string(),
            Value::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Num(x) if x.is_finite() => json!(x),
            Value::Num(x) => json!(x.to_string()),
            Value::Int(i) => json!(i),
            Value::Text(s) => json!(s),
            Value::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub metadata: Vec<(String, String)>,
    pub summary: Vec<(String, Value)>,
    pub tables: Vec<Table>,
    /// Echo of the effective configuration, as TOML.
    pub config: Option<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            metadata: vec![
                ("command".into(), command.into()),
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
                ("seed".into(), seed.to_string()),
            ],
            summary: Vec::new(),
            tables: Vec::new(),
            config: None,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Num(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out += &format!("# {k}: {v}\n");
        }
        if let Some(config) = &self.config {
            for line in config.lines().filter(|l| !l.is_empty()) {
                out += &format!("# config: {line}\n");
            }
        }
        out += "quantity,value\n";
        for (k, v) in &self.summary {
            out += &format!("{k},{}\n", v.csv());
        }
        for t in &self.tables {
            out += &format!("\n# table: {}\n{}\n", t.name, t.columns.join(","));
            for row in &t.rows {
                out += &row.iter().map(Value::csv).collect::<Vec<_>>().join(",");
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let metadata: Map<String, Json> = self.metadata.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let summary: Map<String, Json> = self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let tables: Map<String, Json> = self
            .tables
            .iter()
            .map(|t| {
                let rows: Vec<Json> = t.rows.iter().map(|r| Json::Array(r.iter().map(Value::json).collect())).collect();
                (t.name.clone(), json!({ "columns": t.columns, "rows": rows }))
            })
            .collect();
        let config = match &self.config {
            Some(text) => toml::from_str::<toml::Value>(text).map(|v| json!(v)).unwrap_or(Json::Null),
            None => Json::Null,
        };
        let doc = json!({
            "command": self.command,
            "metadata": metadata,
            "config": config,
            "summary": summary,
            "tables": tables,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}
