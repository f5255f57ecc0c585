//! Tabular output with CSV and JSON encodings.
//!
//! Numbers are written in shortest round-trip form. Missing cells are `NA`
//! in CSV and `null` in JSON; non-finite numbers are the strings `inf`,
//! `-inf` and `NaN` in both.

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::config::{Format, RunConfig, SCHEMA_VERSION};
use crate::CliError;

pub const NA: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Na,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Na, Cell::Num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn to_csv_field(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
            Cell::Na => NA.to_string(),
        }
    }

    fn from_csv_field(s: &str) -> Cell {
        if s == NA {
            Cell::Na
        } else if let Ok(v) = s.parse::<f64>() {
            Cell::Num(v)
        } else {
            Cell::Text(s.to_string())
        }
    }

    fn from_json(v: &serde_json::Value) -> Result<Cell, CliError> {
        use serde_json::Value;
        Ok(match v {
            Value::Null => Cell::Na,
            Value::Number(n) => Cell::Num(
                n.as_f64()
                    .ok_or_else(|| CliError::Config(format!("bad number {n}")))?,
            ),
            Value::String(s) => match s.as_str() {
                "inf" | "-inf" | "NaN" => Cell::Num(s.parse().expect("non-finite literal")),
                _ => Cell::Text(s.clone()),
            },
            other => return Err(CliError::Config(format!("unexpected cell {other}"))),
        })
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Num(v) => s.serialize_str(&format_number(*v)),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Na => s.serialize_unit(),
        }
    }
}

fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:?}")
    }
}

/// Which command produced a dataset and with what settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub command: CommandEcho,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub warnings: Vec<String>,
}

impl Serialize for Dataset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Dataset", 5)?;
        st.serialize_field("schema_version", &SCHEMA_VERSION)?;
        st.serialize_field("command", &self.command)?;
        st.serialize_field("columns", &self.columns)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("warnings", &self.warnings)?;
        st.end()
    }
}

impl Dataset {
    pub fn new(name: &str, config: &RunConfig, columns: &[&str]) -> Self {
        Self {
            command: CommandEcho {
                name: name.to_string(),
                config: config.clone(),
            },
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            warnings: config.warnings.clone(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(self)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.to_csv(),
        }
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let echo =
            serde_json::to_string(&self.command).map_err(|e| CliError::Numerical(e.to_string()))?;
        let mut out = format!("# schema_version: {SCHEMA_VERSION}\n# command: {echo}\n");
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        let mut wtr = csv::Writer::from_writer(out.into_bytes());
        let io = |e: csv::Error| CliError::Numerical(e.to_string());
        wtr.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(Cell::to_csv_field))
                .map_err(io)?;
        }
        wtr.into_inner()
            .map_err(|e| CliError::Numerical(e.to_string()))
    }
}

/// Columns and rows of an encoded dataset, for reading output back.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn parse(bytes: &[u8], format: Format) -> Result<Table, CliError> {
        match format {
            Format::Csv => Self::parse_csv(bytes),
            Format::Json => Self::parse_json(bytes),
        }
    }

    fn parse_csv(bytes: &[u8]) -> Result<Table, CliError> {
        let text = std::str::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))?;
        let warnings = text
            .lines()
            .filter_map(|l| l.strip_prefix("# warning: "))
            .map(str::to_string)
            .collect();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(bytes);
        let bad = |e: csv::Error| CliError::Config(e.to_string());
        let columns = rdr
            .headers()
            .map_err(bad)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.map_err(bad)?.iter().map(Cell::from_csv_field).collect());
        }
        Ok(Table {
            columns,
            rows,
            warnings,
        })
    }

    fn parse_json(bytes: &[u8]) -> Result<Table, CliError> {
        let v: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))?;
        let strings = |key: &str| -> Vec<String> {
            v[key]
                .as_array()
                .map(|a| {
                    a.iter()
                        .filter_map(|s| s.as_str().map(str::to_string))
                        .collect()
                })
                .unwrap_or_default()
        };
        let mut rows = Vec::new();
        for row in v["rows"].as_array().into_iter().flatten() {
            let cells = row
                .as_array()
                .ok_or_else(|| CliError::Config("row is not an array".into()))?;
            rows.push(
                cells
                    .iter()
                    .map(Cell::from_json)
                    .collect::<Result<_, _>>()?,
            );
        }
        Ok(Table {
            columns: strings("columns"),
            rows,
            warnings: strings("warnings"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, RawConfig};

    fn sample() -> Dataset {
        let cfg = validate_config(&RawConfig::default()).unwrap();
        let mut d = Dataset::new("test", &cfg, &["branch", "a", "b"]);
        d.push(vec!["plus".into(), 0.1.into(), Cell::Na]);
        d.push(vec!["minus".into(), 1e-300.into(), f64::INFINITY.into()]);
        d.push(vec!["plus".into(), (1.0f64 / 3.0).into(), 4.23e15.into()]);
        d
    }

    #[test]
    fn csv_and_json_agree() {
        let d = sample();
        let csv = Table::parse(&d.encode(Format::Csv).unwrap(), Format::Csv).unwrap();
        let json = Table::parse(&d.encode(Format::Json).unwrap(), Format::Json).unwrap();
        assert_eq!(csv, json);
        assert_eq!(csv.rows, d.rows);
        assert_eq!(csv.columns, d.columns);
    }

    #[test]
    fn missing_cells_are_marked() {
        let d = sample();
        let csv = String::from_utf8(d.encode(Format::Csv).unwrap()).unwrap();
        assert!(csv.contains("plus,0.1,NA\n"));
        let json = String::from_utf8(d.encode(Format::Json).unwrap()).unwrap();
        assert!(json.contains("null") && json.contains("\"inf\""));
    }
}
