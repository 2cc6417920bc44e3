//! Delimited-text ingestion with per-column type inference, and the
//! matching writer.

use serde::{Deserialize, Serialize};

use super::value::parse_date;
use super::{Column, ColumnData, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseOptions {
    pub delimiter: char,
    pub has_header: bool,
    pub na_tokens: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            has_header: true,
            na_tokens: vec![String::new(), "NA".to_owned(), "NaN".to_owned()],
        }
    }
}

const ZIP_MAGIC: &[u8] = b"PK\x03\x04";
const OLE_MAGIC: &[u8] = &[0xD0, 0xCF, 0x11, 0xE0];
const BOM: &str = "\u{feff}";

/// Parses delimited UTF-8 text into a [`Table`].
///
/// Each column gets the first type of integer, real, boolean, date, text
/// that every one of its non-missing cells parses as.
pub fn parse_csv(bytes: &[u8], options: &ParseOptions) -> Result<Table> {
    if bytes.starts_with(ZIP_MAGIC) || bytes.starts_with(OLE_MAGIC) {
        return Err(Error::UnsupportedFormat);
    }
    let text = std::str::from_utf8(bytes).map_err(|e| {
        Error::EncodingError(format!(
            "invalid byte sequence at offset {}",
            e.valid_up_to()
        ))
    })?;
    let text = text.strip_prefix(BOM).unwrap_or(text);

    if !options.delimiter.is_ascii() {
        return Err(Error::MalformedCsv(format!(
            "delimiter {:?} is not a single ASCII character",
            options.delimiter
        )));
    }
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(options.delimiter as u8)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let first = match records.next() {
        None => return Err(Error::EmptyInput),
        Some(r) => r.map_err(|e| Error::MalformedCsv(e.to_string()))?,
    };
    let width = first.len();
    let names: Vec<String> = if options.has_header {
        first.iter().map(str::to_owned).collect()
    } else {
        (1..=width).map(|i| format!("col{i}")).collect()
    };

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); width];
    let is_na = |field: &str| options.na_tokens.iter().any(|t| t == field);
    let mut push_row = |record: &::csv::StringRecord, row: usize| -> Result<()> {
        if record.len() != width {
            return Err(Error::RaggedRows {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push((!is_na(field)).then(|| field.to_owned()));
        }
        Ok(())
    };

    let mut n_rows = 0;
    if !options.has_header {
        n_rows += 1;
        push_row(&first, n_rows)?;
    }
    for record in records {
        let record = record.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        n_rows += 1;
        push_row(&record, n_rows)?;
    }
    if n_rows == 0 {
        return Err(Error::EmptyInput);
    }

    let columns = names
        .into_iter()
        .zip(cells)
        .map(|(name, raw)| Column::new(name, infer_column(raw)))
        .collect();
    Table::new("", columns)
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "TRUE" => Some(true),
        "false" | "FALSE" => Some(false),
        _ => None,
    }
}

fn convert<T>(raw: &[Option<String>], parse: impl Fn(&str) -> Option<T>) -> Option<Vec<Option<T>>> {
    raw.iter()
        .map(|cell| match cell {
            None => Some(None),
            Some(s) => parse(s).map(Some),
        })
        .collect()
}

fn infer_column(raw: Vec<Option<String>>) -> ColumnData {
    if let Some(v) = convert(&raw, |s| s.parse::<i64>().ok()) {
        ColumnData::Integer(v)
    } else if let Some(v) = convert(&raw, parse_real) {
        ColumnData::Real(v)
    } else if let Some(v) = convert(&raw, parse_bool) {
        ColumnData::Boolean(v)
    } else if let Some(v) = convert(&raw, parse_date) {
        ColumnData::Date(v)
    } else {
        ColumnData::Text(raw)
    }
}

/// Writes `table` as comma-separated text with a header row and LF line
/// endings. Missing cells become empty fields.
pub fn to_csv(table: &Table) -> Vec<u8> {
    let mut writer = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .quote_style(::csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    // Writing into a Vec cannot fail.
    writer
        .write_record(table.column_names())
        .expect("in-memory write");
    let mut row = Vec::with_capacity(table.n_columns());
    for r in 0..table.n_rows() {
        row.clear();
        row.extend(
            table
                .columns()
                .iter()
                .map(|c| c.get(r).map(|v| v.render()).unwrap_or_default()),
        );
        writer.write_record(&row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}
