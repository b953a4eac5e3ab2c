use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A run record: a JSON object with `run_id`, `command` and `seed` plus the
/// command's payload. serde_json's default map keeps keys sorted, which
/// fixes the key order of every emitted document.
pub struct Record {
    pub fields: Map<String, Value>,
    /// Rows for tabular CSV output; when absent CSV gets one row of the
    /// record's scalar fields.
    pub table: Option<&'static str>,
}

impl Record {
    pub fn new(run_id: String, command: &str, seed: u64) -> Self {
        let mut fields = Map::new();
        fields.insert("run_id".into(), Value::String(run_id));
        fields.insert("command".into(), Value::String(command.into()));
        fields.insert("seed".into(), Value::from(seed));
        Self { fields, table: None }
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(|e| CliError::io(e.to_string()))?;
        self.fields.insert(key.into(), v);
        Ok(())
    }

    /// Copies every field of a serializable struct into the record.
    pub fn merge(&mut self, value: impl serde::Serialize) -> Result<(), CliError> {
        match serde_json::to_value(value).map_err(|e| CliError::io(e.to_string()))? {
            Value::Object(obj) => {
                self.fields.extend(obj);
                Ok(())
            }
            other => Err(CliError::io(format!("expected an object, got {other}"))),
        }
    }

    pub fn pass(&self) -> bool {
        self.fields.get("pass").and_then(Value::as_bool).unwrap_or(true)
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(";"),
        Value::Object(_) => serde_json::to_string(v).unwrap_or_default(),
        other => other.to_string(),
    }
}

fn render_csv(record: &Record) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::io(e.to_string());
    match record.table.and_then(|t| record.fields.get(t)).and_then(Value::as_array) {
        Some(rows) => {
            let header: Vec<String> = rows
                .iter()
                .filter_map(Value::as_object)
                .flat_map(|o| o.keys().cloned())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            w.write_record(&header).map_err(err)?;
            for row in rows {
                let cells: Vec<String> = header
                    .iter()
                    .map(|h| row.get(h).map(scalar).unwrap_or_default())
                    .collect();
                w.write_record(&cells).map_err(err)?;
            }
        }
        None => {
            let scalars: Vec<(&String, &Value)> = record
                .fields
                .iter()
                .filter(|(_, v)| !v.is_object())
                .collect();
            w.write_record(scalars.iter().map(|(k, _)| k.as_str())).map_err(err)?;
            w.write_record(scalars.iter().map(|(_, v)| scalar(v))).map_err(err)?;
        }
    }
    w.into_inner().map_err(|e| CliError::io(e.to_string()))
}

pub fn render(record: &Record, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&record.fields)
                .map_err(|e| CliError::io(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => render_csv(record),
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(e.to_string())),
    }
}
