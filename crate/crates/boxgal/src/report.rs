//! Rendering of experiment results as text, JSON or CSV.
//!
//! Everything except `elapsed_ms` is a pure function of the inputs, so two
//! runs with equal arguments produce equal payloads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}`; expected text, json or csv")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .cloned()
                        .zip(row.iter().map(|c| cell_value(c)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Numeric-looking cells become JSON numbers, everything else stays a string.
fn cell_value(cell: &str) -> Value {
    if let Ok(i) = cell.parse::<i64>() {
        return Value::from(i);
    }
    match cell.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::from(x),
        _ => match cell {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => Value::String(cell.to_string()),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub params: Map<String, Value>,
    pub fields: Map<String, Value>,
    pub table: Option<Table>,
    /// Human-readable rendering; one result per line.
    pub text: String,
    pub elapsed_ms: Option<u64>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            params: Map::new(),
            fields: Map::new(),
            table: None,
            text: String::new(),
            elapsed_ms: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.to_string(), value.into());
        self
    }

    pub fn line(&mut self, line: impl AsRef<str>) -> &mut Self {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
        self
    }

    /// The deterministic part of the JSON object.
    pub fn payload(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), Value::String(self.command.clone()));
        obj.insert("params".into(), Value::Object(self.params.clone()));
        for (k, v) in &self.fields {
            obj.insert(k.clone(), v.clone());
        }
        if let Some(t) = &self.table {
            obj.insert("rows".into(), t.to_json());
        }
        Value::Object(obj)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.payload();
        if let (Value::Object(obj), Some(ms)) = (&mut v, self.elapsed_ms) {
            obj.insert("elapsed_ms".into(), Value::from(ms));
        }
        v
    }

    pub fn render<W: Write>(&self, format: Format, out: &mut W) -> anyhow::Result<()> {
        match format {
            Format::Text => out.write_all(self.text.as_bytes())?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                out.write_all(b"\n")?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut *out);
                match &self.table {
                    Some(t) => {
                        w.write_record(&t.header)?;
                        for row in &t.rows {
                            w.write_record(row)?;
                        }
                    }
                    None => {
                        w.write_record(["key", "value"])?;
                        for (k, v) in self.params.iter().chain(&self.fields) {
                            w.write_record([k.as_str(), &scalar_text(v)])?;
                        }
                    }
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// JSON number for finite values and `null` otherwise.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::Null
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo");
        r.param("n", 3).param("law", "box:a=0,L=10");
        r.field("estimate", 0.25).field("note", "a, \"quoted\" value");
        r.line("0.25");
        r
    }

    #[test]
    fn json_keeps_timing_separate() {
        let mut r = sample();
        r.elapsed_ms = Some(17);
        let full = r.to_json();
        assert_eq!(full["elapsed_ms"], 17);
        assert!(r.payload().get("elapsed_ms").is_none());
        assert_eq!(full["params"]["n"], 3);
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let mut out = Vec::new();
        sample().render(Format::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("note,\"a, \"\"quoted\"\" value\"\n"), "{text}");
        assert!(text.contains("law,\"box:a=0,L=10\"\n"));
    }

    #[test]
    fn tables_render_as_rows() {
        let mut r = Report::new("t");
        let mut t = Table::new(&["x", "ok", "name"]);
        t.push(vec!["100".into(), "true".into(), "p".into()]);
        r.table = Some(t);
        let mut out = Vec::new();
        r.render(Format::Csv, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,ok,name\n100,true,p\n");
        let rows = &r.payload()["rows"];
        assert_eq!(rows[0]["x"], 100);
        assert_eq!(rows[0]["ok"], true);
    }

    #[test]
    fn format_names_round_trip() {
        for f in [Format::Text, Format::Json, Format::Csv] {
            assert_eq!(f.to_string().parse::<Format>().unwrap(), f);
        }
        assert!("xml".parse::<Format>().is_err());
    }
}
