//! Long-format panel CSV: parsing against a configured schema and the
//! canonical serialization.
//!
//! Canonical form writes columns in the order country, indicator, topic,
//! year, value, rows ascending by (country, indicator, year), with every
//! cell of the cube present and missing values as empty fields. Parsing
//! the canonical serialization reproduces the panel exactly.

use std::path::Path;

use stldtw_core::panel::{IndicatorPanel, PanelBuilder};

use crate::settings::SchemaSettings;
use crate::{CliError, Result};

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::MissingColumn(name.to_string()))
}

/// Parse long-format CSV text into a panel.
pub fn parse_panel(text: &str, schema: &SchemaSettings) -> Result<IndicatorPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let country_col = header_index(&headers, &schema.country)?;
    let indicator_col = header_index(&headers, &schema.indicator)?;
    let topic_col = header_index(&headers, &schema.topic)?;
    let year_col = header_index(&headers, &schema.year)?;
    let value_col = header_index(&headers, &schema.value)?;

    let mut builder = PanelBuilder::new(schema.year_bounds(), schema.taxonomy_mode());
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |col: usize| -> Result<&str> {
            record.get(col).ok_or_else(|| CliError::Row {
                row,
                message: format!("missing field {col}"),
            })
        };
        let country = field(country_col)?;
        let indicator = field(indicator_col)?;
        let topic = field(topic_col)?;
        let year: i32 = field(year_col)?.parse().map_err(|_| CliError::Row {
            row,
            message: format!("unparseable year {:?}", field(year_col).unwrap_or("")),
        })?;
        let raw_value = field(value_col)?;
        let value = if raw_value.is_empty() {
            None
        } else {
            Some(raw_value.parse::<f64>().map_err(|_| CliError::Row {
                row,
                message: format!("unparseable value {raw_value:?}"),
            })?)
        };
        builder
            .push(country, indicator, topic, year, value)
            .map_err(|e| CliError::Row {
                row,
                message: e.to_string(),
            })?;
    }
    builder.finish().map_err(CliError::Core)
}

/// Read and parse a panel file.
pub fn read_panel(path: &Path, schema: &SchemaSettings) -> Result<IndicatorPanel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_panel(&text, schema)
}

/// Serialize a panel in canonical form using the schema's column names.
pub fn write_panel(panel: &IndicatorPanel, schema: &SchemaSettings) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        schema.country.as_str(),
        schema.indicator.as_str(),
        schema.topic.as_str(),
        schema.year.as_str(),
        schema.value.as_str(),
    ])?;
    for obs in panel.observations() {
        let topic = panel.taxonomy().topic_of(&obs.indicator).unwrap_or("");
        let value = match obs.value {
            Some(v) => format!("{v}"),
            None => String::new(),
        };
        w.write_record([
            obs.country.as_str(),
            obs.indicator.as_str(),
            topic,
            &obs.year.to_string(),
            &value,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Pipeline(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Read one numeric column out of an arbitrary CSV file; empty cells are
/// rejected.
pub fn read_series_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let col = header_index(&headers, column)?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let raw = record.get(col).unwrap_or("");
        let v: f64 = raw.parse().map_err(|_| CliError::Row {
            row,
            message: format!("unparseable value {raw:?} in column {column:?}"),
        })?;
        values.push(v);
    }
    Ok(values)
}
