use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{DType, Table, Value};

/// Row filter. JSON forms:
///
/// ```json
/// {"column": "age", "op": ">=", "value": 18}
/// {"column": "income", "op": "is_missing"}
/// {"and": [p, q]}   {"or": [p, q]}   {"not": p}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Predicate {
    And {
        and: Vec<Predicate>,
    },
    Or {
        or: Vec<Predicate>,
    },
    Not {
        not: Box<Predicate>,
    },
    Compare {
        column: String,
        op: Comparator,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<Value>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "contains")]
    Contains,
    #[serde(rename = "is_missing")]
    IsMissing,
    #[serde(rename = "not_missing")]
    NotMissing,
}

impl Predicate {
    pub fn compare(column: impl Into<String>, op: Comparator, value: impl Into<Value>) -> Self {
        Predicate::Compare {
            column: column.into(),
            op,
            value: Some(value.into()),
        }
    }

    pub fn is_missing(column: impl Into<String>) -> Self {
        Predicate::Compare {
            column: column.into(),
            op: Comparator::IsMissing,
            value: None,
        }
    }

    pub fn not_missing(column: impl Into<String>) -> Self {
        Predicate::Compare {
            column: column.into(),
            op: Comparator::NotMissing,
            value: None,
        }
    }

    pub fn negate(self) -> Self {
        Predicate::Not {
            not: Box::new(self),
        }
    }

    /// Resolves column references and checks operand types against `table`.
    pub fn compile(&self, table: &Table) -> Result<CompiledPredicate> {
        Ok(match self {
            Predicate::And { and } => CompiledPredicate::And(
                and.iter()
                    .map(|p| p.compile(table))
                    .collect::<Result<_>>()?,
            ),
            Predicate::Or { or } => {
                CompiledPredicate::Or(or.iter().map(|p| p.compile(table)).collect::<Result<_>>()?)
            }
            Predicate::Not { not } => CompiledPredicate::Not(Box::new(not.compile(table)?)),
            Predicate::Compare { column, op, value } => {
                let index = table.column_index(column)?;
                let dtype = table.columns()[index].dtype();
                let operand = match op {
                    Comparator::IsMissing | Comparator::NotMissing => None,
                    _ => {
                        let value = value.as_ref().ok_or_else(|| {
                            Error::TypeMismatch(format!(
                                "operator {op:?} on `{column}` needs a value"
                            ))
                        })?;
                        Some(coerce_operand(column, dtype, *op, value)?)
                    }
                };
                CompiledPredicate::Compare {
                    index,
                    op: *op,
                    operand,
                }
            }
        })
    }
}

fn coerce_operand(column: &str, dtype: DType, op: Comparator, value: &Value) -> Result<Value> {
    let mismatch = || {
        Error::TypeMismatch(format!(
            "cannot apply {op:?} with {} operand to {dtype} column `{column}`",
            value.dtype()
        ))
    };
    let op_ok = match op {
        Comparator::Eq | Comparator::Ne => true,
        Comparator::Lt | Comparator::Le | Comparator::Gt | Comparator::Ge => dtype.is_ordered(),
        Comparator::Contains => dtype == DType::Text,
        Comparator::IsMissing | Comparator::NotMissing => true,
    };
    if !op_ok {
        return Err(mismatch());
    }
    match (dtype, value) {
        (DType::Integer | DType::Real, Value::Integer(_) | Value::Real(_)) => Ok(value.clone()),
        (DType::Boolean, Value::Boolean(_)) => Ok(value.clone()),
        (DType::Text, Value::Text(_)) => Ok(value.clone()),
        // JSON strings that look like dates arrive as dates.
        (DType::Text, Value::Date(_)) => Ok(Value::Text(value.render())),
        (DType::Date, Value::Date(_)) => Ok(value.clone()),
        _ => Err(mismatch()),
    }
}

#[derive(Debug, Clone)]
pub enum CompiledPredicate {
    And(Vec<CompiledPredicate>),
    Or(Vec<CompiledPredicate>),
    Not(Box<CompiledPredicate>),
    Compare {
        index: usize,
        op: Comparator,
        operand: Option<Value>,
    },
}

impl CompiledPredicate {
    /// Comparisons against a missing cell are false; `is_missing` and
    /// `not_missing` are the only tests that look at missingness.
    pub fn eval(&self, table: &Table, row: usize) -> bool {
        match self {
            CompiledPredicate::And(ps) => ps.iter().all(|p| p.eval(table, row)),
            CompiledPredicate::Or(ps) => ps.iter().any(|p| p.eval(table, row)),
            CompiledPredicate::Not(p) => !p.eval(table, row),
            CompiledPredicate::Compare { index, op, operand } => {
                let column = &table.columns()[*index];
                match op {
                    Comparator::IsMissing => return column.is_missing(row),
                    Comparator::NotMissing => return !column.is_missing(row),
                    _ => {}
                }
                let (Some(cell), Some(operand)) = (column.get(row), operand) else {
                    return false;
                };
                if let Comparator::Contains = op {
                    return match (&cell, operand) {
                        (Value::Text(hay), Value::Text(needle)) => hay.contains(needle.as_str()),
                        _ => false,
                    };
                }
                let Some(ord) = cell.partial_cmp_value(operand) else {
                    return false;
                };
                match op {
                    Comparator::Eq => ord == Ordering::Equal,
                    Comparator::Ne => ord != Ordering::Equal,
                    Comparator::Lt => ord == Ordering::Less,
                    Comparator::Le => ord != Ordering::Greater,
                    Comparator::Gt => ord == Ordering::Greater,
                    Comparator::Ge => ord != Ordering::Less,
                    Comparator::Contains | Comparator::IsMissing | Comparator::NotMissing => {
                        unreachable!()
                    }
                }
            }
        }
    }
}

/// Rows of `table` satisfying `predicate`, in their original order.
pub fn filter_rows(table: &Table, predicate: &Predicate) -> Result<Table> {
    let compiled = predicate.compile(table)?;
    let rows: Vec<usize> = (0..table.n_rows())
        .filter(|&r| compiled.eval(table, r))
        .collect();
    Ok(table.take_rows(&rows))
}
