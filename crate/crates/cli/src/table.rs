//! Tables of numbers written as CSV or JSON with a fixed number of
//! significant digits, and parsers that read them back.

use std::io::Write;

use serde_json::value::RawValue;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputFormat {
    pub kind: Format,
    /// Significant digits, 1 to 17.
    pub precision: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// `x` in scientific notation with exactly `precision` significant digits.
/// Non-finite values are spelled `nan`, `inf` and `-inf`.
pub fn format_number(x: f64, precision: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", precision.saturating_sub(1), x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn text(cell: &Cell, precision: usize) -> String {
        match cell {
            Cell::Num(x) => format_number(*x, precision),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    /// RFC 4180 CSV with a header row.
    pub fn write_csv(&self, out: impl Write, precision: usize) -> Result<(), CliError> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        writer.write_record(&self.headers)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|c| Self::text(c, precision)))?;
        }
        writer.flush()?;
        Ok(())
    }

    /// A JSON array with one object per row. Non-finite numbers become strings.
    pub fn to_json(&self, precision: usize) -> Result<String, CliError> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut object: Vec<(String, Box<RawValue>)> = Vec::with_capacity(row.len());
            for (h, c) in self.headers.iter().zip(row) {
                let raw = match c {
                    Cell::Num(x) if x.is_finite() => RawValue::from_string(format_number(*x, precision))?,
                    other => serde_json::value::to_raw_value(&match other {
                        Cell::Num(x) => Value::String(format_number(*x, precision)),
                        Cell::Int(i) => Value::from(*i),
                        Cell::Bool(b) => Value::Bool(*b),
                        Cell::Text(s) => Value::String(s.clone()),
                    })?,
                };
                object.push((h.clone(), raw));
            }
            rows.push(json_object(&object));
        }
        Ok(format!("[{}]\n", rows.join(",")))
    }

    pub fn emit(&self, out: &mut impl Write, format: OutputFormat) -> Result<(), CliError> {
        match format.kind {
            Format::Csv => self.write_csv(out, format.precision),
            Format::Json => {
                out.write_all(self.to_json(format.precision)?.as_bytes())?;
                Ok(())
            }
        }
    }

    #[cfg(test)]
    /// Reads a table written by [`Table::write_csv`]. Cells are typed by
    /// shape: integers, `true`/`false`, numbers, otherwise text.
    pub fn parse_csv(text: &str) -> Result<Self, CliError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            rows.push(record?.iter().map(parse_cell).collect());
        }
        Ok(Self { headers, rows })
    }

    #[cfg(test)]
    /// Reads a table written by [`Table::to_json`]. Column order follows the first row.
    pub fn parse_json(text: &str) -> Result<Self, CliError> {
        let rows: Vec<OrderedRow> = serde_json::from_str(text)?;
        let headers: Vec<String> = rows
            .first()
            .map(|r| r.0.iter().map(|(k, _)| k.clone()).collect())
            .unwrap_or_default();
        let mut table = Self {
            headers: headers.clone(),
            rows: Vec::new(),
        };
        for row in rows {
            let mut cells = Vec::with_capacity(headers.len());
            for h in &headers {
                let cell = match row.0.iter().find(|(k, _)| k == h).map(|(_, v)| v) {
                    Some(Value::Bool(b)) => Cell::Bool(*b),
                    Some(Value::Number(n)) if n.is_i64() => Cell::Int(n.as_i64().unwrap_or_default()),
                    Some(Value::Number(n)) => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
                    Some(Value::String(s)) => parse_cell(s),
                    _ => return Err(CliError::Parse(format!("row lacks column {h:?}"))),
                };
                cells.push(cell);
            }
            table.rows.push(cells);
        }
        Ok(table)
    }
}

#[cfg(test)]
/// A JSON object read with its keys in document order.
struct OrderedRow(Vec<(String, Value)>);

#[cfg(test)]
impl<'de> serde::Deserialize<'de> for OrderedRow {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl<'de> serde::de::Visitor<'de> for Visitor {
            type Value = OrderedRow;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<A: serde::de::MapAccess<'de>>(self, mut map: A) -> Result<OrderedRow, A::Error> {
                let mut fields = Vec::new();
                while let Some(entry) = map.next_entry::<String, Value>()? {
                    fields.push(entry);
                }
                Ok(OrderedRow(fields))
            }
        }
        deserializer.deserialize_map(Visitor)
    }
}

/// Serializes `(key, raw value)` pairs as a JSON object, preserving order.
pub fn json_object(fields: &[(String, Box<RawValue>)]) -> String {
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("{}:{}", Value::String(k.clone()), v.get()))
        .collect();
    format!("{{{}}}", body.join(","))
}

#[cfg(test)]
fn parse_cell(s: &str) -> Cell {
    if let Ok(i) = s.parse::<i64>() {
        return Cell::Int(i);
    }
    match s {
        "true" => return Cell::Bool(true),
        "false" => return Cell::Bool(false),
        "nan" => return Cell::Num(f64::NAN),
        "inf" => return Cell::Num(f64::INFINITY),
        "-inf" => return Cell::Num(f64::NEG_INFINITY),
        _ => {}
    }
    match s.parse::<f64>() {
        Ok(x) => Cell::Num(x),
        Err(_) => Cell::Text(s.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["l", "value", "inside", "note"]);
        t.push(vec![Cell::Int(1), Cell::Num(1.0 / 3.0), Cell::Bool(true), "a, \"quoted\" note".into()]);
        t.push(vec![Cell::Int(2), Cell::Num(-2.5e-12), Cell::Bool(false), "".into()]);
        t
    }

    #[test]
    fn fixed_significant_digits() {
        assert_eq!(format_number(1.0 / 3.0, 4), "3.333e-1");
        assert_eq!(format_number(1.0, 1), "1e0");
        assert_eq!(format_number(-2.5e-12, 3), "-2.50e-12");
        assert_eq!(format_number(0.1, 17), "1.0000000000000001e-1");
        assert_eq!(format_number(f64::INFINITY, 5), "inf");
    }

    #[test]
    fn csv_roundtrip() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf, 6).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("l,value,inside,note\r\n"));
        assert!(text.contains("\"a, \"\"quoted\"\" note\""));
        let back = Table::parse_csv(&text).unwrap();
        assert_eq!(back.headers, sample().headers);
        assert_eq!(back.rows[0][1], Cell::Num(3.33333e-1));
        assert_eq!(back.rows[0][3], Cell::Text("a, \"quoted\" note".into()));
        assert_eq!(back.rows[1][2], Cell::Bool(false));
    }

    #[test]
    fn json_roundtrip_keeps_column_order() {
        let text = sample().to_json(6).unwrap();
        assert!(text.contains(r#""value":3.33333e-1"#));
        let back = Table::parse_json(&text).unwrap();
        assert_eq!(back.headers, vec!["l", "value", "inside", "note"]);
        assert_eq!(back.rows[1][1], Cell::Num(-2.5e-12));
    }

    #[test]
    fn non_finite_numbers_survive_json() {
        let mut t = Table::new(&["x"]);
        t.push(vec![Cell::Num(f64::INFINITY)]);
        let back = Table::parse_json(&t.to_json(3).unwrap()).unwrap();
        assert_eq!(back.rows[0][0], Cell::Num(f64::INFINITY));
    }
}
