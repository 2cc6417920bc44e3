use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;
use crate::table::{Column, ColumnData, DType, Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggFn {
    Sum,
    Mean,
    Count,
    Min,
    Max,
    Median,
    Sd,
}

impl AggFn {
    pub const ALL: [AggFn; 7] = [
        AggFn::Sum,
        AggFn::Mean,
        AggFn::Count,
        AggFn::Min,
        AggFn::Max,
        AggFn::Median,
        AggFn::Sd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AggFn::Sum => "sum",
            AggFn::Mean => "mean",
            AggFn::Count => "count",
            AggFn::Min => "min",
            AggFn::Max => "max",
            AggFn::Median => "median",
            AggFn::Sd => "sd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measure {
    pub column: String,
    pub function: AggFn,
}

impl Measure {
    pub fn new(column: impl Into<String>, function: AggFn) -> Self {
        Self {
            column: column.into(),
            function,
        }
    }

    pub fn output_name(&self) -> String {
        format!("{}_{}", self.function.as_str(), self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AggregationSpec {
    #[serde(default)]
    pub group_keys: Vec<String>,
    pub measures: Vec<Measure>,
}

impl AggregationSpec {
    fn validate(&self, table: &Table) -> Result<()> {
        for key in &self.group_keys {
            table.column(key)?;
        }
        for m in &self.measures {
            let col = table.column(&m.column)?;
            if self.group_keys.contains(&m.column) {
                return Err(Error::InvalidSpec(format!(
                    "`{}` is used both as a group key and as a measure",
                    m.column
                )));
            }
            if m.function != AggFn::Count && !col.dtype().is_numeric() {
                return Err(Error::TypeMismatch(format!(
                    "{} needs a numeric column, `{}` is {}",
                    m.function.as_str(),
                    m.column,
                    col.dtype()
                )));
            }
        }
        Ok(())
    }
}

/// One row per distinct key combination, in order of first appearance.
/// Missing is an ordinary key level. Measures skip missing cells; `sum` of
/// nothing is zero, the other statistics of nothing are missing.
pub fn group_aggregate(table: &Table, spec: &AggregationSpec) -> Result<Table> {
    spec.validate(table)?;
    let key_cols: Vec<&Column> = spec
        .group_keys
        .iter()
        .map(|k| table.column(k))
        .collect::<Result<_>>()?;

    let mut index: HashMap<Vec<Option<Value>>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for row in 0..table.n_rows() {
        let key: Vec<Option<Value>> = key_cols.iter().map(|c| c.get(row)).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(row);
    }

    let first_rows: Vec<usize> = groups.iter().map(|g| g[0]).collect();
    let mut columns: Vec<Column> = key_cols.iter().map(|c| c.take(&first_rows)).collect();
    for m in &spec.measures {
        let col = table.column(&m.column)?;
        columns.push(aggregate_column(col, m, &groups)?);
    }
    Table::new(table.name(), columns)
}

fn aggregate_column(col: &Column, m: &Measure, groups: &[Vec<usize>]) -> Result<Column> {
    let name = m.output_name();
    if m.function == AggFn::Count {
        let counts = groups
            .iter()
            .map(|rows| Some(rows.iter().filter(|&&r| !col.is_missing(r)).count() as i64))
            .collect();
        return Ok(Column::integer(name, counts));
    }

    if let ColumnData::Integer(cells) = col.data() {
        let present =
            |rows: &[usize]| -> Vec<i64> { rows.iter().filter_map(|&r| cells[r]).collect() };
        match m.function {
            AggFn::Sum => {
                let sums = groups
                    .iter()
                    .map(|rows| {
                        present(rows)
                            .into_iter()
                            .try_fold(0i64, i64::checked_add)
                            .map(Some)
                            .ok_or_else(|| {
                                Error::TypeMismatch(format!(
                                    "integer overflow summing `{}`",
                                    col.name()
                                ))
                            })
                    })
                    .collect::<Result<_>>()?;
                return Ok(Column::integer(name, sums));
            }
            AggFn::Min | AggFn::Max => {
                let pick = groups
                    .iter()
                    .map(|rows| {
                        let v = present(rows);
                        if m.function == AggFn::Min {
                            v.into_iter().min()
                        } else {
                            v.into_iter().max()
                        }
                    })
                    .collect();
                return Ok(Column::integer(name, pick));
            }
            _ => {}
        }
    }

    let values = col.as_f64().expect("validated numeric");
    let out = groups
        .iter()
        .map(|rows| {
            let xs: Vec<f64> = rows.iter().filter_map(|&r| values[r]).collect();
            reduce_real(m.function, &xs)
        })
        .collect();
    Ok(Column::real(name, out))
}

fn reduce_real(function: AggFn, xs: &[f64]) -> Option<f64> {
    match function {
        AggFn::Sum => Some(xs.iter().sum()),
        AggFn::Mean => stats::mean(xs),
        AggFn::Min => xs.iter().copied().reduce(f64::min),
        AggFn::Max => xs.iter().copied().reduce(f64::max),
        AggFn::Median => stats::median(xs),
        AggFn::Sd => stats::sample_sd(xs),
        AggFn::Count => Some(xs.len() as f64),
    }
}

/// Output dtype of a measure over a column of `input` type.
pub fn measure_dtype(function: AggFn, input: DType) -> DType {
    match (function, input) {
        (AggFn::Count, _) => DType::Integer,
        (AggFn::Sum | AggFn::Min | AggFn::Max, DType::Integer) => DType::Integer,
        _ => DType::Real,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_by_key() {
        let t = Table::new(
            "t",
            vec![
                Column::text("g", vec![Some("A"), Some("A"), Some("B")]),
                Column::integer("x", vec![Some(1), Some(2), Some(3)]),
            ],
        )
        .unwrap();
        let spec = AggregationSpec {
            group_keys: vec!["g".into()],
            measures: vec![Measure::new("x", AggFn::Sum)],
        };
        let out = group_aggregate(&t, &spec).unwrap();
        assert_eq!(out.column_names().collect::<Vec<_>>(), ["g", "sum_x"]);
        assert_eq!(
            out.column("g").unwrap().data(),
            &ColumnData::Text(vec![Some("A".into()), Some("B".into())])
        );
        assert_eq!(
            out.column("sum_x").unwrap().data(),
            &ColumnData::Integer(vec![Some(3), Some(3)])
        );
    }

    #[test]
    fn single_group_mean() {
        let t = Table::new(
            "t",
            vec![
                Column::integer("k", vec![Some(1), Some(1)]),
                Column::real("x", vec![Some(2.0), Some(4.0)]),
            ],
        )
        .unwrap();
        let spec = AggregationSpec {
            group_keys: vec!["k".into()],
            measures: vec![Measure::new("x", AggFn::Mean)],
        };
        let out = group_aggregate(&t, &spec).unwrap();
        assert_eq!(out.n_rows(), 1);
        assert_eq!(
            out.column("mean_x").unwrap().data(),
            &ColumnData::Real(vec![Some(3.0)])
        );
    }

    #[test]
    fn missing_is_a_key_level_and_is_skipped_in_measures() {
        let t = Table::new(
            "t",
            vec![
                Column::text("g", vec![None, Some("a"), None]),
                Column::real("x", vec![Some(1.0), None, None]),
            ],
        )
        .unwrap();
        let spec = AggregationSpec {
            group_keys: vec!["g".into()],
            measures: AggFn::ALL.iter().map(|&f| Measure::new("x", f)).collect(),
        };
        let out = group_aggregate(&t, &spec).unwrap();
        assert_eq!(out.n_rows(), 2);
        assert_eq!(
            out.column("sum_x").unwrap().data(),
            &ColumnData::Real(vec![Some(1.0), Some(0.0)])
        );
        assert_eq!(
            out.column("count_x").unwrap().data(),
            &ColumnData::Integer(vec![Some(1), Some(0)])
        );
        assert_eq!(
            out.column("mean_x").unwrap().data(),
            &ColumnData::Real(vec![Some(1.0), None])
        );
        assert_eq!(
            out.column("sd_x").unwrap().data(),
            &ColumnData::Real(vec![None, None])
        );
        for c in out.columns() {
            if c.name() != "g" {
                let input = t.column("x").unwrap().dtype();
                let f = AggFn::ALL
                    .iter()
                    .find(|f| c.name().starts_with(f.as_str()))
                    .unwrap();
                assert_eq!(c.dtype(), measure_dtype(*f, input));
            }
        }
    }

    #[test]
    fn count_works_on_text_but_sum_does_not() {
        let t = Table::new(
            "t",
            vec![
                Column::integer("k", vec![Some(1)]),
                Column::text("s", vec![Some("x")]),
            ],
        )
        .unwrap();
        let count = AggregationSpec {
            group_keys: vec!["k".into()],
            measures: vec![Measure::new("s", AggFn::Count)],
        };
        assert!(group_aggregate(&t, &count).is_ok());
        let sum = AggregationSpec {
            group_keys: vec!["k".into()],
            measures: vec![Measure::new("s", AggFn::Sum)],
        };
        assert!(matches!(
            group_aggregate(&t, &sum),
            Err(Error::TypeMismatch(_))
        ));
        let overlap = AggregationSpec {
            group_keys: vec!["k".into()],
            measures: vec![Measure::new("k", AggFn::Count)],
        };
        assert!(matches!(
            group_aggregate(&t, &overlap),
            Err(Error::InvalidSpec(_))
        ));
        let unknown = AggregationSpec {
            group_keys: vec!["zz".into()],
            measures: vec![],
        };
        assert_eq!(
            group_aggregate(&t, &unknown).unwrap_err(),
            Error::UnknownColumn("zz".into())
        );
    }
}
