//! Table and sidecar emission. CSV is the default wire format; floats are
//! printed with 17 significant digits so a round-trip through text preserves
//! the f64 bit pattern.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Field {
    F(f64),
    S(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::F(v) => fmt17(*v),
            Field::S(s) => {
                if s.contains(',') || s.contains('"') {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Field::F(v) => serde_json::json!(v),
            Field::U(v) => serde_json::json!(v),
            Field::S(s) => serde_json::json!(s),
        }
    }
}

/// 17 significant digits: enough to reconstruct any f64 exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Table {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> io::Result<()> {
        let text = match format {
            Format::Csv => {
                let mut s = String::new();
                s.push_str(&self.headers.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Field::csv).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let arr: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = serde_json::Map::new();
                        for (h, f) in self.headers.iter().zip(row) {
                            obj.insert((*h).to_string(), f.json());
                        }
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&arr).expect("table serialization");
                s.push('\n');
                s
            }
        };
        write_text(&text, out)
    }
}

pub fn write_text(text: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => File::create(path)?.write_all(text.as_bytes()),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

/// Where the JSON sidecar of a sampled batch goes: next to the CSV with the
/// extension swapped, or stderr when the batch itself went to stdout.
pub fn write_sidecar(value: &serde_json::Value, out: Option<&Path>) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("sidecar serialization");
    text.push('\n');
    match out {
        Some(path) => {
            let mut side: PathBuf = path.to_path_buf();
            side.set_extension("json");
            if side == path {
                side.set_extension("sidecar.json");
            }
            File::create(side)?.write_all(text.as_bytes())
        }
        None => io::stderr().write_all(text.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_exactly() {
        for v in [
            0.1,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            5e-324,
            -0.0,
            f64::MAX,
        ] {
            let back: f64 = fmt17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {}", fmt17(v));
        }
    }

    #[test]
    fn csv_quotes_embedded_commas() {
        assert_eq!(Field::S("a,b".into()).csv(), "\"a,b\"");
        assert_eq!(Field::S("plain".into()).csv(), "plain");
    }
}
