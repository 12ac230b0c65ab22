use std::io::Write;
use std::path::PathBuf;

use serde_json::{Map, Value};
use spinboson::nevanlinna::fmt_f64;
use spinboson::Error;

use crate::Format;

pub const SCHEMA_VERSION: u32 = 1;

/// A command's result: a JSON body plus a flat table for CSV output.
pub struct Report {
    command: &'static str,
    model: String,
    body: Map<String, Value>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &'static str, model: &str, header: Vec<&'static str>) -> Self {
        Report { command, model: model.to_string(), body: Map::new(), header, rows: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.body.insert(key.to_string(), v);
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, Error> {
        match format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("schema_version".into(), SCHEMA_VERSION.into());
                doc.insert("command".into(), self.command.into());
                doc.insert("model".into(), self.model.clone().into());
                doc.extend(self.body.clone());
                let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.into_inner().map_err(|e| Error::Io(e.into_error()))
            }
        }
    }
}

pub fn num(v: f64) -> String {
    fmt_f64(v)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}
