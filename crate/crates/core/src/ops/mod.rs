//! Row filtering, column selection, grouping and per-variable summaries.

mod aggregate;
mod predicate;
mod summary;

use std::collections::HashSet;

pub use aggregate::{group_aggregate, measure_dtype, AggFn, AggregationSpec, Measure};
pub use predicate::{filter_rows, Comparator, CompiledPredicate, Predicate};
pub use summary::{summarize_column, value_counts, ColumnSummary, FrequencyEntry, FrequencyTable};

use crate::error::{Error, Result};
use crate::table::Table;

/// The requested columns, in request order.
pub fn select_columns<S: AsRef<str>>(table: &Table, names: &[S]) -> Result<Table> {
    let mut seen = HashSet::new();
    let mut columns = Vec::with_capacity(names.len());
    for name in names {
        let name = name.as_ref();
        let col = table.column(name)?;
        if !seen.insert(name) {
            return Err(Error::DuplicateSelection(name.to_owned()));
        }
        columns.push(col.clone());
    }
    if columns.is_empty() {
        return Ok(table.without_columns());
    }
    Table::new(table.name(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Column;

    fn ab() -> Table {
        Table::new(
            "t",
            vec![
                Column::integer("a", vec![Some(1), Some(2)]),
                Column::text("b", vec![Some("x"), None]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_selection() {
        let t = ab();
        assert_eq!(select_columns(&t, &["a", "b"]).unwrap(), t);
    }

    #[test]
    fn reorders() {
        let t = ab();
        let s = select_columns(&t, &["b", "a"]).unwrap();
        assert_eq!(s.column_names().collect::<Vec<_>>(), ["b", "a"]);
        assert_eq!(s.column("a").unwrap(), t.column("a").unwrap());
    }

    #[test]
    fn selection_errors() {
        let t = ab();
        assert_eq!(
            select_columns(&t, &["a", "a"]).unwrap_err(),
            Error::DuplicateSelection("a".into())
        );
        assert_eq!(
            select_columns(&t, &["z"]).unwrap_err(),
            Error::UnknownColumn("z".into())
        );
    }

    #[test]
    fn empty_selection_keeps_row_count() {
        let t = ab();
        let s = select_columns::<&str>(&t, &[]).unwrap();
        assert_eq!(s.n_columns(), 0);
        assert_eq!(s.n_rows(), 2);
    }
}
