//! Immutable typed columnar tables.
//!
//! A [`Table`] is an ordered list of equally long, uniquely named
//! [`Column`]s. Each column carries a fixed [`DType`] and stores its cells
//! as `Option`s, `None` being the missing marker. Tables are never mutated
//! after construction; every operation in [`crate::ops`] returns a new one.

mod csv;
mod value;

use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use self::csv::{parse_csv, to_csv, ParseOptions};
pub use self::value::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    Integer,
    Real,
    Boolean,
    Text,
    Date,
}

impl DType {
    pub fn is_numeric(self) -> bool {
        matches!(self, DType::Integer | DType::Real)
    }

    /// Types with a total order usable by `<`, `<=`, `>`, `>=`.
    pub fn is_ordered(self) -> bool {
        matches!(self, DType::Integer | DType::Real | DType::Date)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DType::Integer => "integer",
            DType::Real => "real",
            DType::Boolean => "boolean",
            DType::Text => "text",
            DType::Date => "date",
        }
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Typed cell storage.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Integer(Vec<Option<i64>>),
    Real(Vec<Option<f64>>),
    Boolean(Vec<Option<bool>>),
    Text(Vec<Option<String>>),
    Date(Vec<Option<NaiveDate>>),
}

macro_rules! for_each_variant {
    ($data:expr, $v:ident => $body:expr) => {
        match $data {
            ColumnData::Integer($v) => $body,
            ColumnData::Real($v) => $body,
            ColumnData::Boolean($v) => $body,
            ColumnData::Text($v) => $body,
            ColumnData::Date($v) => $body,
        }
    };
}

impl ColumnData {
    pub fn dtype(&self) -> DType {
        match self {
            ColumnData::Integer(_) => DType::Integer,
            ColumnData::Real(_) => DType::Real,
            ColumnData::Boolean(_) => DType::Boolean,
            ColumnData::Text(_) => DType::Text,
            ColumnData::Date(_) => DType::Date,
        }
    }

    pub fn len(&self) -> usize {
        for_each_variant!(self, v => v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        for_each_variant!(self, v => v[row].is_none())
    }

    fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Integer(v) => ColumnData::Integer(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Real(v) => ColumnData::Real(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Boolean(v) => ColumnData::Boolean(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&i| v[i].clone()).collect()),
            ColumnData::Date(v) => ColumnData::Date(rows.iter().map(|&i| v[i]).collect()),
        }
    }

    fn empty(dtype: DType) -> ColumnData {
        match dtype {
            DType::Integer => ColumnData::Integer(Vec::new()),
            DType::Real => ColumnData::Real(Vec::new()),
            DType::Boolean => ColumnData::Boolean(Vec::new()),
            DType::Text => ColumnData::Text(Vec::new()),
            DType::Date => ColumnData::Date(Vec::new()),
        }
    }

    fn push(&mut self, value: Option<Value>) -> std::result::Result<(), Value> {
        match (self, value) {
            (ColumnData::Integer(v), None) => v.push(None),
            (ColumnData::Real(v), None) => v.push(None),
            (ColumnData::Boolean(v), None) => v.push(None),
            (ColumnData::Text(v), None) => v.push(None),
            (ColumnData::Date(v), None) => v.push(None),
            (ColumnData::Integer(v), Some(Value::Integer(x))) => v.push(Some(x)),
            (ColumnData::Real(v), Some(Value::Real(x))) if x.is_finite() => v.push(Some(x)),
            (ColumnData::Real(v), Some(Value::Integer(x))) => v.push(Some(x as f64)),
            (ColumnData::Boolean(v), Some(Value::Boolean(x))) => v.push(Some(x)),
            (ColumnData::Text(v), Some(Value::Text(x))) => v.push(Some(x)),
            (ColumnData::Date(v), Some(Value::Date(x))) => v.push(Some(x)),
            (_, Some(other)) => return Err(other),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Self {
            name: name.into(),
            data,
        }
    }

    /// Builds a column of `dtype` from loosely typed cells. Integer values
    /// are accepted into real columns; anything else must match exactly.
    pub fn from_values(
        name: impl Into<String>,
        dtype: DType,
        values: impl IntoIterator<Item = Option<Value>>,
    ) -> Result<Self> {
        let name = name.into();
        let mut data = ColumnData::empty(dtype);
        for value in values {
            data.push(value).map_err(|bad| {
                Error::TypeMismatch(format!(
                    "value {} cannot be stored in {dtype} column `{name}`",
                    bad.render()
                ))
            })?;
        }
        Ok(Self { name, data })
    }

    pub fn integer(name: impl Into<String>, cells: Vec<Option<i64>>) -> Self {
        Self::new(name, ColumnData::Integer(cells))
    }

    pub fn real(name: impl Into<String>, cells: Vec<Option<f64>>) -> Self {
        Self::new(name, ColumnData::Real(cells))
    }

    pub fn boolean(name: impl Into<String>, cells: Vec<Option<bool>>) -> Self {
        Self::new(name, ColumnData::Boolean(cells))
    }

    pub fn text<S: Into<String>>(name: impl Into<String>, cells: Vec<Option<S>>) -> Self {
        Self::new(
            name,
            ColumnData::Text(cells.into_iter().map(|c| c.map(Into::into)).collect()),
        )
    }

    pub fn date(name: impl Into<String>, cells: Vec<Option<NaiveDate>>) -> Self {
        Self::new(name, ColumnData::Date(cells))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, row: usize) -> Option<Value> {
        match &self.data {
            ColumnData::Integer(v) => v[row].map(Value::Integer),
            ColumnData::Real(v) => v[row].map(Value::Real),
            ColumnData::Boolean(v) => v[row].map(Value::Boolean),
            ColumnData::Text(v) => v[row].clone().map(Value::Text),
            ColumnData::Date(v) => v[row].map(Value::Date),
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        self.data.is_missing(row)
    }

    pub fn n_missing(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_missing(i)).count()
    }

    /// Numeric view: integers widened to `f64`. `None` for non-numeric columns.
    pub fn as_f64(&self) -> Option<Vec<Option<f64>>> {
        match &self.data {
            ColumnData::Integer(v) => Some(v.iter().map(|c| c.map(|x| x as f64)).collect()),
            ColumnData::Real(v) => Some(v.clone()),
            _ => None,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = Option<Value>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn take(&self, rows: &[usize]) -> Column {
        Column {
            name: self.name.clone(),
            data: self.data.take(rows),
        }
    }

    pub fn renamed(&self, name: impl Into<String>) -> Column {
        Column {
            name: name.into(),
            data: self.data.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    n_rows: usize,
}

impl Table {
    /// Validates column lengths and names. `n_rows` is taken from the first
    /// column (zero for a table without columns).
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Column::len);
        let mut seen = HashSet::with_capacity(columns.len());
        for (i, col) in columns.iter().enumerate() {
            if col.name.is_empty() {
                return Err(Error::EmptyColumnName(i + 1));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(Error::DuplicateColumn(col.name.clone()));
            }
            if col.len() != n_rows {
                return Err(Error::LengthMismatch {
                    name: col.name.clone(),
                    expected: n_rows,
                    found: col.len(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            columns,
            n_rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(Column::name)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }

    /// New table holding `rows` (in the given order) of every column.
    pub fn take_rows(&self, rows: &[usize]) -> Table {
        Table {
            name: self.name.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Same row count, no columns.
    pub fn without_columns(&self) -> Table {
        Table {
            name: self.name.clone(),
            columns: Vec::new(),
            n_rows: self.n_rows,
        }
    }

    /// Row-major copy of a window of rows, used for paging.
    pub fn rows(&self, offset: usize, limit: usize) -> Vec<Vec<Option<Value>>> {
        let end = offset.saturating_add(limit).min(self.n_rows);
        (offset.min(end)..end)
            .map(|r| self.columns.iter().map(|c| c.get(r)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub dtype: DType,
    pub n_missing: usize,
    pub n_distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub n_rows: usize,
    pub columns: Vec<ColumnSchema>,
}

pub fn schema(table: &Table) -> Schema {
    let columns = table
        .columns
        .iter()
        .map(|col| {
            let mut distinct = HashSet::new();
            let mut n_missing = 0;
            for value in col.values() {
                match value {
                    Some(v) => {
                        distinct.insert(v);
                    }
                    None => n_missing += 1,
                }
            }
            ColumnSchema {
                name: col.name.clone(),
                dtype: col.dtype(),
                n_missing,
                n_distinct: distinct.len(),
            }
        })
        .collect();
    Schema {
        n_rows: table.n_rows,
        columns,
    }
}

// JSON encoding: {"name", "n_rows", "columns": [{"name", "dtype", "cells": [...]}]},
// with missing cells as null and dates as "YYYY-MM-DD".

#[derive(Serialize, Deserialize)]
struct ColumnRepr {
    name: String,
    dtype: DType,
    cells: Vec<serde_json::Value>,
}

impl Serialize for Column {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ColumnRepr {
            name: self.name.clone(),
            dtype: self.dtype(),
            cells: self
                .values()
                .map(|v| Value::opt_to_json(v.as_ref()))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Column {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = ColumnRepr::deserialize(deserializer)?;
        let cells = repr
            .cells
            .iter()
            .map(|cell| Value::from_json(cell, repr.dtype))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Column::from_values(repr.name, repr.dtype, cells).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Table {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Table", 3)?;
        s.serialize_field("name", &self.name)?;
        s.serialize_field("n_rows", &self.n_rows)?;
        s.serialize_field("columns", &self.columns)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Table {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            name: String,
            n_rows: usize,
            columns: Vec<Column>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let table = Table::new(repr.name, repr.columns).map_err(serde::de::Error::custom)?;
        if !table.columns.is_empty() && table.n_rows != repr.n_rows {
            return Err(serde::de::Error::custom(
                "n_rows does not match column lengths",
            ));
        }
        Ok(Table {
            n_rows: repr.n_rows,
            ..table
        })
    }
}
