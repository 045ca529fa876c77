//! Line-oriented JSON helpers shared by every file format in the crate.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// A parsed JSON object with its 1-based line number.
pub struct Line {
    pub line: usize,
    pub object: Map<String, Value>,
}

impl Line {
    pub fn get(&self, field: &'static str) -> Result<&Value> {
        self.object.get(field).ok_or(Error::MissingField {
            line: self.line,
            field,
        })
    }

    pub fn str(&self, field: &'static str) -> Result<String> {
        match self.get(field)? {
            Value::String(s) => Ok(s.clone()),
            other => Err(self.invalid(field, format!("expected a string, got {other}"))),
        }
    }

    pub fn f64(&self, field: &'static str) -> Result<f64> {
        self.get(field)?
            .as_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.invalid(field, "expected a finite number".to_string()))
    }

    pub fn u64(&self, field: &'static str) -> Result<u64> {
        self.get(field)?
            .as_u64()
            .ok_or_else(|| self.invalid(field, "expected a non-negative integer".to_string()))
    }

    pub fn str_list(&self, field: &'static str) -> Result<Vec<String>> {
        let Value::Array(items) = self.get(field)? else {
            return Err(self.invalid(field, "expected an array of strings".to_string()));
        };
        items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| self.invalid(field, "expected an array of strings".to_string()))
            })
            .collect()
    }

    pub fn invalid(&self, field: &'static str, message: String) -> Error {
        Error::InvalidField {
            line: self.line,
            field,
            message,
        }
    }
}

/// Parses JSON-lines text; blank lines are skipped, every other line must
/// be a JSON object.
pub fn parse_lines(text: &str) -> Result<Vec<Line>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            match serde_json::from_str::<Value>(l) {
                Ok(Value::Object(object)) => Ok(Line { line, object }),
                Ok(_) => Err(Error::MalformedLine {
                    line,
                    message: "expected a JSON object".to_string(),
                }),
                Err(e) => Err(Error::MalformedLine {
                    line,
                    message: e.to_string(),
                }),
            }
        })
        .collect()
}

pub fn read_lines(path: &Path) -> Result<Vec<Line>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lines(&text)
}

/// Serializes each item on its own line.
pub fn to_string<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}
