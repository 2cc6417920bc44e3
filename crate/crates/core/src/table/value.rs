use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::DType;
use crate::error::{Error, Result};

/// A single non-missing cell.
///
/// Equality and hashing on reals use the bit pattern (with `-0.0` folded
/// into `0.0`), so values can serve as grouping keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Integer(i64),
    Real(f64),
    Boolean(bool),
    #[serde(with = "iso_date")]
    Date(NaiveDate),
    Text(String),
}

impl Value {
    pub fn dtype(&self) -> DType {
        match self {
            Value::Integer(_) => DType::Integer,
            Value::Real(_) => DType::Real,
            Value::Boolean(_) => DType::Boolean,
            Value::Text(_) => DType::Text,
            Value::Date(_) => DType::Date,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Integer(x) => Some(x as f64),
            Value::Real(x) => Some(x),
            _ => None,
        }
    }

    /// Text form used by CSV output and frequency tables. Reals use the
    /// shortest representation that parses back to the same bits and always
    /// carry a `.` or exponent, so they are never re-inferred as integers.
    pub fn render(&self) -> String {
        match self {
            Value::Integer(x) => x.to_string(),
            Value::Real(x) => format!("{x:?}"),
            Value::Boolean(b) => if *b { "true" } else { "false" }.to_owned(),
            Value::Text(s) => s.clone(),
            Value::Date(d) => d.format("%Y-%m-%d").to_string(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Integer(x) => (*x).into(),
            Value::Real(x) => {
                serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into)
            }
            Value::Boolean(b) => (*b).into(),
            Value::Text(s) => s.clone().into(),
            Value::Date(d) => d.format("%Y-%m-%d").to_string().into(),
        }
    }

    pub fn opt_to_json(value: Option<&Value>) -> serde_json::Value {
        value.map_or(serde_json::Value::Null, Value::to_json)
    }

    /// Decodes a JSON cell for a column of `dtype`; `null` is missing.
    pub fn from_json(json: &serde_json::Value, dtype: DType) -> Result<Option<Value>> {
        use serde_json::Value as J;
        let bad = || Error::TypeMismatch(format!("JSON value {json} is not a valid {dtype} cell"));
        Ok(Some(match (dtype, json) {
            (_, J::Null) => return Ok(None),
            (DType::Integer, J::Number(n)) => Value::Integer(n.as_i64().ok_or_else(bad)?),
            (DType::Real, J::Number(n)) => {
                Value::Real(n.as_f64().filter(|x| x.is_finite()).ok_or_else(bad)?)
            }
            (DType::Boolean, J::Bool(b)) => Value::Boolean(*b),
            (DType::Text, J::String(s)) => Value::Text(s.clone()),
            (DType::Date, J::String(s)) => Value::Date(parse_date(s).ok_or_else(bad)?),
            _ => return Err(bad()),
        }))
    }

    /// Ordering for values of comparable types. Integers and reals compare
    /// numerically with each other; other mixes are incomparable.
    pub fn partial_cmp_value(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Integer(a), Value::Integer(b)) => Some(a.cmp(b)),
            (Value::Date(a), Value::Date(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Boolean(a), Value::Boolean(b)) => Some(a.cmp(b)),
            (a, b) => a.as_f64()?.partial_cmp(&b.as_f64()?),
        }
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Integer(x)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Boolean(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_owned())
    }
}

fn real_bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Integer(a), Value::Integer(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => real_bits(*a) == real_bits(*b),
            (Value::Boolean(a), Value::Boolean(b)) => a == b,
            (Value::Text(a), Value::Text(b)) => a == b,
            (Value::Date(a), Value::Date(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Integer(x) => x.hash(state),
            Value::Real(x) => real_bits(*x).hash(state),
            Value::Boolean(b) => b.hash(state),
            Value::Text(s) => s.hash(state),
            Value::Date(d) => d.hash(state),
        }
    }
}

/// Strict ISO 8601 calendar date, `YYYY-MM-DD`.
pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    let shape_ok = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shape_ok {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

mod iso_date {
    use chrono::NaiveDate;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &NaiveDate, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&d.format("%Y-%m-%d"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_date(&s).ok_or_else(|| serde::de::Error::custom("not a YYYY-MM-DD date"))
    }
}
