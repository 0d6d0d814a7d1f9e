//! Run reports and their JSON/CSV renderings.
//!
//! A command produces one JSON object whose `rows` array feeds the CSV view,
//! so both formats always carry the same values.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "spectra/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// What a command hands back to `main`.
pub struct Output {
    pub result: Map<String, Value>,
    /// Dotted paths into each row, in CSV column order.
    pub columns: Vec<&'static str>,
    /// Trailing `name,value` lines appended to the CSV table.
    pub summary: Vec<&'static str>,
    /// A checked inequality failed.
    pub violation: bool,
}

impl Output {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Output {
            result: Map::new(),
            columns,
            summary: Vec::new(),
            violation: false,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.result.insert(key.to_string(), v);
    }

    pub fn rows<T: Serialize>(&mut self, rows: &[T]) {
        self.set("rows", rows);
    }
}

fn lookup<'a>(v: &'a Value, path: &str) -> &'a Value {
    path.split('.')
        .fold(v, |v, key| v.get(key).unwrap_or(&Value::Null))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

pub fn render(command: &str, config: Value, out: &Output, format: Format) -> String {
    match format {
        Format::Json => {
            let mut top = Map::new();
            top.insert("schema".into(), SCHEMA.into());
            top.insert("command".into(), command.into());
            top.insert("config".into(), config);
            top.insert("result".into(), Value::Object(out.result.clone()));
            let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .flexible(true)
                .from_writer(Vec::new());
            w.write_record(&out.columns).expect("in-memory csv");
            let empty = Vec::new();
            let rows = out
                .result
                .get("rows")
                .and_then(Value::as_array)
                .unwrap_or(&empty);
            for row in rows {
                w.write_record(out.columns.iter().map(|c| cell(lookup(row, c))))
                    .expect("in-memory csv");
            }
            for key in &out.summary {
                let v = out.result.get(*key).unwrap_or(&Value::Null);
                w.write_record([key.to_string(), cell(v)])
                    .expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf8 csv")
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_uses_the_json_rows() {
        let mut out = Output::new(vec!["k", "a.b", "missing"]);
        out.set(
            "rows",
            json!([{"k": 1, "a": {"b": "1/2"}}, {"k": 2, "a": {"b": true}}]),
        );
        out.set("best", 3.5);
        out.summary.push("best");
        let csv = render("x", json!({}), &out, Format::Csv);
        assert_eq!(csv, "k,a.b,missing\n1,1/2,\n2,true,\nbest,3.5\n");
    }

    #[test]
    fn json_carries_schema_and_config() {
        let out = Output::new(vec![]);
        let text = render("walk", json!({"seed": 1}), &out, Format::Json);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["config"]["seed"], 1);
    }
}
