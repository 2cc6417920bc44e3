use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;
use crate::table::Table;

/// Descriptive statistics of one numeric variable. `n` counts every cell,
/// the statistics use only the non-missing ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub n: usize,
    pub n_missing: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: Option<f64>,
}

pub fn summarize_column(table: &Table, name: &str) -> Result<ColumnSummary> {
    let col = table.column(name)?;
    let cells = col
        .as_f64()
        .ok_or_else(|| Error::NonNumericColumn(name.to_owned()))?;
    let xs: Vec<f64> = cells.iter().flatten().copied().collect();
    if xs.is_empty() {
        return Err(Error::AllMissing(name.to_owned()));
    }
    let sorted = stats::sorted(&xs);
    let q = |p| stats::quantile_sorted(&sorted, p).expect("non-empty");
    Ok(ColumnSummary {
        n: cells.len(),
        n_missing: cells.len() - xs.len(),
        min: sorted[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: sorted[sorted.len() - 1],
        mean: stats::mean(&sorted).expect("non-empty"),
        sd: stats::sample_sd(&sorted),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub level: String,
    pub count: usize,
}

/// Level counts sorted by descending count, then ascending level.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub entries: Vec<FrequencyEntry>,
}

impl FrequencyTable {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }
}

pub fn value_counts(table: &Table, name: &str) -> Result<FrequencyTable> {
    let col = table.column(name)?;
    let mut counts: HashMap<String, usize> = HashMap::new();
    for value in col.values().flatten() {
        *counts.entry(value.render()).or_default() += 1;
    }
    let mut entries: Vec<FrequencyEntry> = counts
        .into_iter()
        .map(|(level, count)| FrequencyEntry { level, count })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.level.cmp(&b.level)));
    Ok(FrequencyTable { entries })
}
