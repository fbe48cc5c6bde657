//! Tabular output as CSV or JSON.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that output is exact and byte-reproducible.

use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(f) => format_float(*f),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => s.clone(),
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        // JSON has no literal for non-finite numbers
        Value::Float(f) if !f.is_finite() => "null".into(),
        Value::Float(f) => format_float(*f),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => json_string(s),
    }
}

/// A named table with leading metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Metadata as `# key=value` lines, then a header and the rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={}", csv_cell(v));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let rows = std::iter::once(self.columns.clone())
            .chain(self.rows.iter().map(|r| r.iter().map(csv_cell).collect()));
        for row in rows {
            w.write_record(&row).expect("writing to memory cannot fail");
        }
        out.push_str(
            &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8"),
        );
        out
    }

    pub fn to_json(&self) -> String {
        let meta: Vec<String> = self
            .metadata
            .iter()
            .map(|(k, v)| format!("{}:{}", json_string(k), json_cell(v)))
            .collect();
        let cols: Vec<String> = self.columns.iter().map(|c| json_string(c)).collect();
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "[{}]",
                    r.iter().map(json_cell).collect::<Vec<_>>().join(",")
                )
            })
            .collect();
        format!(
            "{{\"metadata\":{{{}}},\"columns\":[{}],\"rows\":[{}]}}\n",
            meta.join(","),
            cols.join(","),
            rows.join(",")
        )
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["n", "energy", "name"]);
        t.meta("q", 0.5);
        t.push(vec![0u32.into(), 0.5.into(), "a\"b".into()]);
        t.push(vec![1u32.into(), f64::NAN.into(), "c".into()]);
        t
    }

    #[test]
    fn float_format_round_trips() {
        for &v in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_layout() {
        assert_eq!(
            sample().to_csv(),
            "# q=5.0000000000000000e-1\nn,energy,name\n0,5.0000000000000000e-1,\"a\"\"b\"\n1,nan,c\n"
        );
    }

    #[test]
    fn json_layout() {
        assert_eq!(
            sample().to_json(),
            "{\"metadata\":{\"q\":5.0000000000000000e-1},\"columns\":[\"n\",\"energy\",\"name\"],\
             \"rows\":[[0,5.0000000000000000e-1,\"a\\\"b\"],[1,null,\"c\"]]}\n"
        );
    }
}
